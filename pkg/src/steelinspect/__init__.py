"""steelinspect: steel-surface defect inspection toolkit.

Library modules:

- ``imaging``          raster types, PGM/PNG I/O, convolution, cleanup
- ``histogram_peaks``  dominant-peak detection and global thresholding
- ``line_filter``      Hessian-eigenvalue line emphasis
- ``segmentation``     valley-emphasis Otsu, region growing, full pipeline
- ``stitching``        exposure-compensated mosaic construction
- ``registration3d``   ICP point-cloud alignment
- ``inspection_sim``   climbing-robot adhesion and edge-avoidance simulator
- ``evalmetrics``      PI/SI/DSC scoring
- ``config``           run configuration and manifests
- ``cli``              the ``steel-inspect`` batch front-end
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    config,
    evalmetrics,
    histogram_peaks,
    imaging,
    inspection_sim,
    line_filter,
    registration3d,
    segmentation,
    stitching,
)
