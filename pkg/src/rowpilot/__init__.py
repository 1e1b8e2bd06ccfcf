"""Crop-row vision navigation and docking toolkit.

Library layout:

- ``imgcore``   pixel-level primitives (color, blur, morphology, canny, CLAHE)
- ``ppmio``     binary PPM/PGM image I/O (PNG optional via Pillow)
- ``rowdetect`` cropline target-point detectors, metrics, benchmark harness
- ``hsvadapt``  self-adjusting HSV calibration with Otsu fallback
- ``dockdetect`` definition-based circle detection for the charging station
- ``fieldsim``  deterministic synthetic field / docking-station scene generator
- ``robotsim``  closed-loop differential-drive simulation
- ``cli``       command-line front end (``rowpilot`` entry point)
"""

__version__ = "0.1.0"
