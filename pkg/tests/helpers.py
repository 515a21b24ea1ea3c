"""Shared fixtures-in-code for the test suite: synthetic data and models."""

import csv

import numpy as np

from gmpe_ann import (GroundMotionRecord, NetworkModel, Normalization, Target,
                      batch_values, published_normalization)


def synthetic_records(model, n, seed, noise_sigma=0.0,
                      mw_range=(3.0, 5.8), vs30_range=(150.0, 1500.0),
                      rjb_range=(4.0, 500.0)):
    """Catalog drawn from a model, optionally with noise on the normalized log.

    The column matching the model target carries the generated values; the
    other intensity column is filled with a positive placeholder.
    """
    rng = np.random.default_rng(seed)
    mags = rng.uniform(*mw_range, n)
    vels = rng.uniform(*vs30_range, n)
    dists = rng.uniform(*rjb_range, n)
    values = batch_values(model, mags, vels, dists)
    if noise_sigma:
        noise = noise_sigma * rng.standard_normal(n)
        values = values * np.exp(noise * model.normalization.log_out_div)
    records = []
    for i in range(n):
        v = float(values[i])
        records.append(GroundMotionRecord(
            event_id=f"ev{i:05d}", station_id=f"st{i:05d}",
            magnitude=float(mags[i]), vs30=float(vels[i]), rjb=float(dists[i]),
            pga=v if model.target is Target.PGA else 1.0,
            pgv=v if model.target is Target.PGV else 1.0,
        ))
    return records


def random_model(rng, hidden_count=None, target=Target.PGA, scale=2.0):
    """A random but valid model, for round-trip and property tests."""
    h = int(hidden_count) if hidden_count is not None else int(rng.integers(1, 11))
    return NetworkModel(
        hidden_count=h,
        input_hidden_weights=rng.uniform(-scale, scale, (h, 3)),
        hidden_biases=rng.uniform(-scale, scale, h),
        hidden_output_weights=rng.uniform(-scale, scale, h),
        output_bias=float(rng.uniform(-scale, scale)),
        normalization=published_normalization(target),
        target=target,
    )


def single_neuron_model(target=Target.PGV):
    """A fixed 1-hidden-neuron generator with a gentle response surface."""
    return NetworkModel(
        hidden_count=1,
        input_hidden_weights=np.array([[2.0, -0.5, -3.0]]),
        hidden_biases=np.array([0.5]),
        hidden_output_weights=np.array([2.5]),
        output_bias=-1.5,
        normalization=Normalization(6.0, 1792.0, 522.0, 2.5),
        target=target,
    )


def write_catalog_csv(path, records, extra_columns=()):
    """Write records in the catalog schema, optionally with baseline columns."""
    header = ["event_id", "station_id", "mw", "vs30_mps", "rjb_km",
              "pga_cmps2", "pgv_cmps", *extra_columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [r.event_id, r.station_id, repr(r.magnitude), repr(r.vs30),
                   repr(r.rjb), repr(r.pga), repr(r.pgv)]
            if "baseline_pga_cmps2" in extra_columns:
                row.append("" if r.baseline_pga is None else repr(r.baseline_pga))
            if "baseline_pgv_cmps" in extra_columns:
                row.append("" if r.baseline_pgv is None else repr(r.baseline_pgv))
            writer.writerow(row)
