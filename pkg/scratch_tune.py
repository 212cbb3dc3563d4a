"""Scratch harness for tuning the synthetic fixture (not part of the package)."""

import sys
import time

import numpy as np

from loadseg.clustering import agglomerative, dbscan_sweep, default_eps_grid, kmeans, kmedoids
from loadseg.consensus import contingency, align, cross_compare
from loadseg.features import assemble_matrix
from loadseg.ingest import LoadProfile, normalize_columns
from loadseg.synthetic import FixtureSpec, generate_fixture, MIX_A, MIX_B
from loadseg.validity import sweep


def feature_space(fixture):
    profiles = [
        LoadProfile(hid, tuple(float(v) for v in row), 1)
        for hid, row in zip(fixture.ids, fixture.profiles)
    ]
    ids, raw = assemble_matrix(profiles)
    X, _ = normalize_columns(raw)
    # assemble_matrix sorts by id which matches generation order (zero-padded)
    assert ids == fixture.ids
    return X


def agree_table(ref_labels, other_labels, name):
    table = contingency(ref_labels, other_labels, "kmeans", name)
    report = align(table)
    return report


def main():
    spec = FixtureSpec()
    fixture = generate_fixture(spec)
    X = feature_space(fixture)
    planted = fixture.planted
    n = len(planted)
    print(f"n={n}  sizes={np.bincount(planted)}")

    t0 = time.time()
    km = kmeans(X, 7, seed=0, restarts=10)
    print(f"kmeans@7 in {time.time()-t0:.1f}s")

    # how well does kmeans@7 match the planted structure?
    rep = agree_table(planted, km.labels, "kmeans7")
    print("planted vs kmeans7 per-cluster agreement:",
          {k: round(v, 3) for k, v in rep.per_cluster_agreement.items()})

    t0 = time.time()
    ward, _ = agglomerative(X, 7, "ward")
    print(f"ward@7 in {time.time()-t0:.1f}s")
    t0 = time.time()
    pam = kmedoids(X, 7, seed=0)
    print(f"pam@7 in {time.time()-t0:.1f}s")

    t0 = time.time()
    grid = default_eps_grid(X, min_pts=5)
    db = dbscan_sweep(X, grid, min_pts=5)
    print(f"dbscan sweep in {time.time()-t0:.1f}s -> k={db.best.n_clusters} "
          f"eps={db.best.params['eps']:.3f} noise={db.best.noise_fraction:.3f}")
    for c in db.candidates:
        print(f"   eps={c.eps:.3f} k={c.n_clusters} noise={c.noise_fraction:.2f} sil={c.silhouette}")

    labelings = {"kmeans": km, "agglomerative": ward, "kmedoids": pam, "dbscan": db.best}
    result = cross_compare(labelings, reference="kmeans")
    print("flags:", sorted(result.flagged))
    for name, report in result.reports.items():
        print(f"  vs {name}: ", {k: round(v, 3) for k, v in sorted(report.per_cluster_agreement.items())},
              "unstable:", sorted(report.unstable))

    # which kmeans clusters hold the mixtures?
    for m in (MIX_A, MIX_B):
        members = planted == m
        values, counts = np.unique(km.labels[members], return_counts=True)
        print(f"planted mixture {m} -> kmeans clusters {dict(zip(values.tolist(), counts.tolist()))}")

    if "--sweeps" in sys.argv:
        t0 = time.time()
        rep_km = sweep(X, "kmeans", range(2, 16), seed=0, restarts=10)
        print(f"kmeans sweep in {time.time()-t0:.0f}s chosen:", rep_km.chosen)
        t0 = time.time()
        rep_ag = sweep(X, "agglomerative", range(2, 16), seed=0)
        print(f"agglo sweep in {time.time()-t0:.0f}s chosen:", rep_ag.chosen)
        t0 = time.time()
        rep_pm = sweep(X, "kmedoids", range(2, 16), seed=0)
        print(f"kmedoids sweep in {time.time()-t0:.0f}s chosen:", rep_pm.chosen)


if __name__ == "__main__":
    main()
