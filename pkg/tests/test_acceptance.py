#!/usr/bin/env python3
"""
Test di accettazione sul comportamento complessivo.
Le proprietà su istanze piccole girano sempre; quelle sulla configurazione di default
completa (24 fasce orarie, 63 richieste) solo con FRAN_SLOW_TESTS=1.
"""
import math
import os
import time
from dataclasses import replace
from typing import List

from test_config import DEFAULT_CONFIG_PATH, DOMINANCE_TOL, SLOW_TESTS
from test_utils import capture_function_output, random_instance, setup_python_path, temporary_directory

setup_python_path()

from config import EXIT_OK, LATENCY_SWEEP_CSV, LOAD_SWEEP_CSV  # noqa: E402
from demand import generate_requests  # noqa: E402
from main import main  # noqa: E402
from model import HostingPolicy, NetworkInstance, NodeKind, work_rate  # noqa: E402
from scenario_config import load_config  # noqa: E402
from scenarios import auto_latency_grid, run_latency_sweep, run_load_sweep  # noqa: E402
from services import SolveService  # noqa: E402

# wall-clock limit for the full default compare
COMPARE_DEADLINE_S = 600.0


def _slow() -> bool:
    if not SLOW_TESTS:
        print("   (saltato: impostare FRAN_SLOW_TESTS=1)")
    return SLOW_TESTS


def _default():
    config = load_config(DEFAULT_CONFIG_PATH)
    return config, SolveService(config.solver, config.formulation)


def test_fran_dominates_cran_on_random_instances():
    service = SolveService()
    for seed in range(100, 200):
        inst = random_instance(seed)
        cran = service.solve(inst, HostingPolicy.CRAN)
        fran = service.solve(inst, HostingPolicy.FRAN)
        assert cran.is_optimal and fran.is_optimal, f"seed {seed}"
        assert fran.objective <= cran.objective + DOMINANCE_TOL, f"seed {seed}"
        assert fran.root_bound <= fran.objective + 1e-7


def test_default_load_sweep_band_and_tracking():
    if not _slow():
        return
    config, service = _default()
    result = run_load_sweep(config.instance, config.profile, config.demand, service, workers=4)
    assert not result.failed_rows
    assert 20.0 <= result.savings.average_pct <= 45.0, result.savings.average_pct
    tracking = result.metadata["load_tracking_spearman"]
    assert tracking["cran"] >= 0.95 and tracking["fran"] >= 0.95, tracking


def test_default_latency_sweep_band_and_plateau():
    if not _slow():
        return
    config, service = _default()
    grid, meta = auto_latency_grid(config.instance, config.demand, service)
    result = run_latency_sweep(config.instance, config.demand, grid, service, workers=4, grid_metadata=meta)
    assert not result.failed_rows
    assert 15.0 <= result.savings.average_pct <= 40.0, result.savings.average_pct
    fran, cran = result.column("fran"), result.column("cran")
    assert all(b <= a + 1e-9 for a, b in zip(fran, fran[1:]))
    assert all(math.isclose(v, fran[-1], rel_tol=1e-6) for v in fran[-3:])
    # at the tightest point only GPON nodes have the headroom
    assert abs(fran[0] - cran[0]) / cran[0] < 0.01


def test_cran_flat_with_ample_gpon_capacity():
    if not _slow():
        return
    config, service = _default()
    inst = config.instance
    full = generate_requests(config.demand, inst.ud_ids())
    total = max(sum(work_rate(r, n) for r in full) for n in inst.nodes if n.kind is NodeKind.OLT)
    nodes = tuple(replace(n, capacity_f=10.0 * total) if n.kind in (NodeKind.OLT, NodeKind.ONU) else n
                  for n in inst.nodes)
    roomy = NetworkInstance(nodes, inst.links)
    grid, meta = auto_latency_grid(roomy, config.demand, service)
    result = run_latency_sweep(roomy, config.demand, grid, service, workers=4, grid_metadata=meta)
    cran = result.column("cran")
    assert (max(cran) - min(cran)) / min(cran) < 0.01


def _compare_csvs(out: str, workers: int) -> List[bytes]:
    code, _ = capture_function_output(main, ["compare", DEFAULT_CONFIG_PATH, "--out", out, "--workers", str(workers)])
    assert code == EXIT_OK, f"compare con {workers} worker: codice {code}"
    contents = []
    for name in (LOAD_SWEEP_CSV, LATENCY_SWEEP_CSV):
        with open(os.path.join(out, name), "rb") as f:
            contents.append(f.read())
    return contents


def test_default_compare_is_deterministic():
    if not _slow():
        return
    with temporary_directory() as tmp:
        single = _compare_csvs(os.path.join(tmp, "w1"), 1)
        pooled = _compare_csvs(os.path.join(tmp, "w4"), 4)
    assert single == pooled, "i CSV devono essere identici byte per byte"


def test_default_compare_finishes_in_time():
    if not _slow():
        return
    with temporary_directory() as tmp:
        start = time.perf_counter()
        _compare_csvs(tmp, 4)
        elapsed = time.perf_counter() - start
    assert elapsed < COMPARE_DEADLINE_S, f"compare completo in {elapsed:.1f} s"
