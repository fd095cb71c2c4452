// Display formatting. Distances render at three decimals everywhere; the
// underlying full-precision values stay in the response objects and are
// never recomputed client-side.

export function formatDistance(d: number): string {
  return d.toFixed(3);
}
