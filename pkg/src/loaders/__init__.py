"""
File loaders for the meshing kernel.

Triangle soups come in as OFF, OBJ or STL; surfaces go out as OFF or OBJ;
BSP complexes round-trip through the PVOL text format.
"""

from .soup_loader import TriangleSoupFile, detect_format, read_soup, write_surface
from .volume_io import read_volume, write_volume

__all__ = [
    'TriangleSoupFile',
    'detect_format',
    'read_soup',
    'write_surface',
    'read_volume',
    'write_volume',
]
