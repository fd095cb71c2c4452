"""panelfit: cognitive distance between evaluation panels and research groups.

Quantifies how well an expert panel's publication profile covers the
research groups it evaluates, from the journals both publish in. Two
profile methods (map barycenters and similarity-adapted publication
vectors) with bootstrap percentile confidence intervals, what-if panel
recomposition, reports, a CLI and an HTTP service.
"""

__version__ = "0.1.0"
