"""Smoke test for the egoclose Python extension.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import math

import egoclose_py as ec


def main():
    # path 0-1-2-3-4
    path = ec.Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert path.node_count == 5 and path.edge_count == 4
    assert ec.ego_closeness(path, 2) == [1.5, 2.5, 3.0, 2.5, 1.5]
    assert ec.local_metric(path, "ego", 1) == [float(d) for d in path.degrees()]
    assert path.bfs_distances(0) == [0, 1, 2, 3, 4]

    g = ec.Graph.barabasi_albert(300, 4, 1)
    assert g.is_connected()
    closeness = ec.closeness_exact(g)
    signal = ec.ego_closeness(g)
    assert ec.topk_pearson(signal, closeness, 30) > 0.9

    ms = ec.build_measurements(g, signal, m=120, l=75, builder="hiclose", seed=3)
    assert ms.num_measurements == 120
    assert all(ms.feasibility(g))
    assert all(len(r) == 76 for r in ms.rows)
    for row, y in zip(ms.rows, ms.y):
        assert math.isclose(sum(signal[u] for u in row), y, rel_tol=1e-12)

    result = ec.lasso_solve(ms, lam=1.0, nonneg=True)
    assert result["converged"]
    assert min(result["x_hat"]) >= 0.0
    detected = [u for u, _ in ec.top_k(result["x_hat"], 45)]
    truth = [u for u, _ in ec.top_k(closeness, 45)]
    p, r = ec.precision_recall(detected, truth)
    f = ec.f_measure(p, r)
    assert 0.0 <= f <= 1.0

    reports = ec.run_experiment_toml(
        'm = 0.4\nl = 0.25\nk = 0.15\nseeds = [0, 1]\n'
        '[graph]\nmodel = "ba"\nn = 150\nattach = 3\n'
    )
    assert len(reports) == 1 and len(reports[0]["runs"]) == 2

    try:
        ec.top_k([1.0], 2)
    except ValueError:
        pass
    else:
        raise AssertionError("k out of range must raise")

    print(f"egoclose_py {ec.__version__}: ok (F = {f:.3f})")


if __name__ == "__main__":
    main()
