import math

import numpy as np
import pytest

from landslide_risk.catalog import DEFAULT_HMA_BBOX, filter_region, fixture_path, parse_catalog


@pytest.fixture(scope="session")
def parsed():
    return parse_catalog(fixture_path())


@pytest.fixture(scope="session")
def records(parsed):
    return filter_region(parsed[0], DEFAULT_HMA_BBOX)


def oracle_haversine(a, b, radius=6371.0):
    """Central angle via the atan2 (spherical Vincenty) form, written independently."""
    p1, l1 = math.radians(a[0]), math.radians(a[1])
    p2, l2 = math.radians(b[0]), math.radians(b[1])
    dl = l2 - l1
    num = math.hypot(math.cos(p2) * math.sin(dl),
                     math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl))
    den = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return radius * math.atan2(num, den)


def oracle_edges(coords, threshold):
    """O(n^2) pairwise scan."""
    out = set()
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            if oracle_haversine(coords[i], coords[j]) <= threshold:
                out.add((i, j))
    return out


def random_coords(rng, n, bbox=DEFAULT_HMA_BBOX):
    return np.column_stack([rng.uniform(bbox.lat_min, bbox.lat_max, n),
                            rng.uniform(bbox.lon_min, bbox.lon_max, n)])


# -- GNN oracles ----------------------------------------------------------------

def small_model_config():
    from landslide_risk.gnn import ModelConfig

    return ModelConfig(gcn_hidden=8, gat_heads=2, gat_head_dim=4, gat2_out=6, head_hidden=5)


def random_graph_edges(rng, n, p=0.4):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    src = [i for i, _ in pairs]
    dst = [j for _, j in pairs]
    from landslide_risk.spatial_graph import from_edges

    return from_edges(n, src, dst, [1.0] * len(pairs))


def path_graph(n):
    from landslide_risk.spatial_graph import from_edges

    return from_edges(n, list(range(n - 1)), list(range(1, n)), [1.0] * (n - 1))


def finite_difference_check(config, params, x, graph, labels, mask, rel_floor=1e-7):
    """Worst relative error between analytic and central-difference gradients.

    Step per entry is 1e-4 * max(1, |theta|). Relative error is
    |a - n| / max(|a|, |n|, rel_floor).
    """
    from landslide_risk.gnn import loss_and_grads

    _, grads = loss_and_grads(config, params, x, graph, labels, mask)
    worst = 0.0
    for name, value in params.items():
        flat = value.reshape(-1)
        gflat = grads[name].reshape(-1)
        for k in range(flat.size):
            theta = flat[k]
            eps = 1e-4 * max(1.0, abs(theta))
            flat[k] = theta + eps
            up, _ = loss_and_grads(config, params, x, graph, labels, mask)
            flat[k] = theta - eps
            down, _ = loss_and_grads(config, params, x, graph, labels, mask)
            flat[k] = theta
            num = (up - down) / (2 * eps)
            err = abs(num - gflat[k]) / max(abs(num), abs(gflat[k]), rel_floor)
            worst = max(worst, err)
    return worst


def gradcheck_problem(seed, n=8):
    """Random small model, features, graph, labels and mask for one seed."""
    import numpy as np

    from landslide_risk.gnn import init_params

    rng = np.random.default_rng(seed)
    config = small_model_config()
    params = init_params(config, seed)
    # nonzero biases so every parameter path is exercised
    for name in params:
        if name.endswith(".b"):
            params[name] = rng.normal(scale=0.1, size=params[name].shape)
    x = rng.normal(size=(n, config.in_dim))
    graph = random_graph_edges(rng, n)
    labels = rng.integers(0, 3, size=n)
    mask = np.arange(n)
    return config, params, x, graph, labels, mask
