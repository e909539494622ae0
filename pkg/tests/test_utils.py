#!/usr/bin/env python3
"""
Utility functions comuni per tutti i test del progetto fran-energy.
Contiene funzioni di supporto riutilizzabili: percorso dei sorgenti, directory
temporanee, generazione di istanze casuali piccole (per il confronto con l'oracolo).
"""

import math
import os
import shutil
import sys
import tempfile
from contextlib import contextmanager
from typing import Any, Optional, Tuple


# Aggiungi il percorso src al PYTHONPATH per i test
def setup_python_path():
    """
    Aggiunge la directory src al PYTHONPATH per permettere le importazioni.
    Deve essere chiamata all'inizio di ogni modulo di test.
    """
    src_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src'))
    if src_path not in sys.path:
        sys.path.insert(0, src_path)


setup_python_path()

import numpy as np  # noqa: E402

from demand import DemandConfig, Range, generate_requests  # noqa: E402
from model import NetworkInstance, Request  # noqa: E402
from topology import D2D_PATTERNS, NodeProfile, TopologySpec, build_fran_topology  # noqa: E402


@contextmanager
def temporary_directory():
    """
    Context manager per creare una directory temporanea che viene automaticamente pulita.

    Usage:
        with temporary_directory() as temp_dir:
            # Usa temp_dir per operazioni temporanee
            pass
        # Directory automaticamente rimossa
    """
    temp_dir = tempfile.mkdtemp(prefix="fran_energy_test_")
    try:
        yield temp_dir
    finally:
        shutil.rmtree(temp_dir, ignore_errors=True)


def capture_function_output(func, *args, **kwargs) -> Tuple[Any, str]:
    """
    Cattura l'output di una funzione (utile per testare print statements).

    Returns:
        Tupla (risultato_funzione, output_catturato)
    """
    import io
    from contextlib import redirect_stdout

    captured_output = io.StringIO()
    with redirect_stdout(captured_output):
        result = func(*args, **kwargs)

    return result, captured_output.getvalue()


def random_instance(seed: int, max_uds: int = 5, max_requests: int = 3,
                    latency_probability: float = 0.5) -> NetworkInstance:
    """
    Istanza casuale di dimensione "oracolo": 1 OLT, 1 ONU, 1 eNodeB, fino a max_uds UD
    e fino a max_requests richieste, con capacità dei link abbondante.

    Args:
        seed: seme del generatore numpy
        latency_probability: probabilità che una richiesta abbia un vincolo di latenza
    """
    rng = np.random.default_rng(seed)
    n_uds = int(rng.integers(1, max_uds + 1))
    pattern = D2D_PATTERNS[int(rng.integers(0, len(D2D_PATTERNS)))]
    ud_profile = NodeProfile(capacity_f=float(rng.uniform(2.0, 8.0)), cpi=float(rng.uniform(1.0, 3.0)),
                             vm_overhead_w=float(rng.uniform(0.1, 0.5)), proc_energy=float(rng.uniform(0.8, 2.0)))
    enb_profile = NodeProfile(capacity_f=float(rng.uniform(6.0, 14.0)), cpi=1.5,
                              vm_overhead_w=float(rng.uniform(0.5, 1.5)), proc_energy=float(rng.uniform(0.8, 1.5)))
    instance = build_fran_topology(TopologySpec(ud_groups=(n_uds,), d2d=pattern, ud=ud_profile, enodeb=enb_profile))
    uds = instance.ud_ids()
    requests = []
    for k in range(int(rng.integers(1, max_requests + 1))):
        latency = math.inf
        if rng.random() < latency_probability:
            latency = float(rng.uniform(0.2, 2.0))
        requests.append(Request(
            id=f"q{k}",
            source=uds[int(rng.integers(0, len(uds)))],
            arrival_a=float(rng.uniform(0.5, 3.0)),
            instr=float(rng.uniform(0.1, 0.4)),
            traffic_t=float(rng.uniform(1.0, 6.0)),
            max_latency_l=latency,
        ))
    return instance.with_requests(requests)


def small_cell_instance(n_uds: int = 3, requests_per_ud: int = 1, seed: int = 7,
                        latency: Optional[float] = None) -> NetworkInstance:
    """Una cella della topologia di default con richieste generate da demand"""
    base = build_fran_topology(TopologySpec(ud_groups=(n_uds,)))
    demand = DemandConfig(seed=seed, requests_per_ud=requests_per_ud,
                          max_latency_l=Range(0.5, 2.0))
    instance = base.with_requests(generate_requests(demand, base.ud_ids()))
    return instance if latency is None else instance.with_latency(latency)
