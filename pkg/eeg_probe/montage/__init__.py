from .montage import Montage, load_builtin, load_montage, region_catalog, region_rows, select_region, \
    select_channels, BUILTIN_NAMES, ALL_KEY
