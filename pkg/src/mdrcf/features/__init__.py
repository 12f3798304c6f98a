from mdrcf.features.color import (
    ColorProbabilityMap,
    color_histogram,
    color_names,
    foreground_probability,
    intensity_channels,
    load_cn_table,
)
from mdrcf.features.hog import hog, hog_batch
from mdrcf.features.patch import extract_patch, extract_window, to_float_image

__all__ = [
    "ColorProbabilityMap", "color_histogram", "color_names", "foreground_probability",
    "intensity_channels", "load_cn_table", "hog", "hog_batch", "extract_patch",
    "extract_window", "to_float_image",
]
