"""Numpy implementations of the distance kernels.

Same signatures and results as the compiled module; used when the extension
is not built or when ``LANDSLIDE_RISK_PURE_PYTHON`` is set.
"""
import numpy as np

_BLOCK = 512


def _hav(lat1, lon1, lat2, lon2, radius):
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    sdp = np.sin((p2 - p1) * 0.5)
    sdl = np.sin(np.radians(lon2 - lon1) * 0.5)
    h = sdp * sdp + np.cos(p1) * np.cos(p2) * sdl * sdl
    return 2.0 * radius * np.arcsin(np.sqrt(np.minimum(h, 1.0)))


def haversine_matrix(lat_a, lon_a, lat_b, lon_b, radius):
    lat_a = np.asarray(lat_a, dtype=np.float64)
    lon_a = np.asarray(lon_a, dtype=np.float64)
    lat_b = np.asarray(lat_b, dtype=np.float64)
    lon_b = np.asarray(lon_b, dtype=np.float64)
    return _hav(lat_a[:, None], lon_a[:, None], lat_b[None, :], lon_b[None, :], radius)


def threshold_pairs(lat, lon, threshold, radius):
    lat = np.asarray(lat, dtype=np.float64)
    lon = np.asarray(lon, dtype=np.float64)
    n = lat.shape[0]
    out_i, out_j, out_d = [], [], []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d = haversine_matrix(lat[start:stop], lon[start:stop], lat, lon, radius)
        rows = np.arange(start, stop)[:, None]
        mask = (np.arange(n)[None, :] > rows) & (d <= threshold)
        ii, jj = np.nonzero(mask)
        out_i.append(ii + start)
        out_j.append(jj)
        out_d.append(d[ii, jj])
    if not out_i:
        return (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.float64))
    return (np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64),
            np.concatenate(out_d))
