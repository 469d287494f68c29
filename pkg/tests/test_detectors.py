import numpy as np
import pytest

from catprep.detectors import (detect_global, detect_local, detect_target,
                               make_target_spec, toric_sector)
from catprep.lattice import Lattice
from catprep.protocols import ProtocolParams, make_backend, step_chain, step_lieb
from catprep.rng import trajectory_rng
from catprep.tableau import Basis, Tableau


def exact_chain_state(L, seed=0):
    lat = Lattice.chain(L)
    params = ProtocolParams(p_u=1.0, p_m=1.0)
    backend = make_backend(lat, params)
    step_chain(backend, lat, params, 1, trajectory_rng(seed))
    return lat, backend.state


def test_all_minus_state_verdicts():
    lat = Lattice.chain(8)
    spec = make_target_spec("cat_x", lat)
    t = Tableau(8, Basis.MINUS_X)
    assert not detect_local(t, spec)
    assert detect_global(t, spec)       # odd-site X parity is already there
    assert not detect_target(t, spec)


def test_exact_protocol_fires_cat_target():
    lat, state = exact_chain_state(8)
    spec = make_target_spec("cat_x", lat)
    assert detect_local(state, spec)
    assert detect_global(state, spec)
    assert detect_target(state, spec)


def test_group_closure_fires_with_all_but_one_local():
    # fixing L/2 - 1 of the pairs implies the last via group closure
    lat, state = exact_chain_state(12, seed=3)
    spec = make_target_spec("cat_x", lat)
    assert detect_local(state, spec)


def test_detect_does_not_mutate():
    lat, state = exact_chain_state(8, seed=1)
    spec = make_target_spec("cat_x", lat)
    x, z, ph = state.x.copy(), state.z.copy(), state.phase.copy()
    detect_target(state, spec)
    assert np.array_equal(state.x, x) and np.array_equal(state.z, z)
    assert np.array_equal(state.phase, ph)


def test_target_spec_lattice_mismatch():
    with pytest.raises(ValueError):
        make_target_spec("cat_x", Lattice.lieb(2))
    with pytest.raises(ValueError):
        make_target_spec("toric_code", Lattice.chain(8))
    with pytest.raises(ValueError):
        make_target_spec("unknown", Lattice.chain(8))


# ----------------------------------------------------------------------
# toric code

def exact_lieb_state(L, seed=0):
    lat = Lattice.lieb(L)
    params = ProtocolParams(p_u=1.0, p_m=1.0)
    backend = make_backend(lat, params)
    step_lieb(backend, lat, params, 1, trajectory_rng(seed))
    return lat, backend.state


def test_exact_lieb_fires_toric_code():
    lat, state = exact_lieb_state(4)
    spec = make_target_spec("toric_code", lat)
    assert detect_target(state, spec)


def test_toric_sector_signs():
    lat, state = exact_lieb_state(4, seed=5)
    spec = make_target_spec("toric_code", lat)
    v_signs, p_signs = toric_sector(state, spec)
    assert set(np.abs(v_signs)) == {1}
    # plaquettes are built by the unitary layer alone: always +1
    assert np.all(p_signs == 1)
    # vertex defects come in pairs on the torus
    assert np.prod(v_signs) == 1


def test_toric_sector_uniform_for_all_plus_outcomes(forced_factory):
    # with every outcome forced to +1 the sector is uniform; the common sign
    # is -1 because the star stabilizers inherit the -X of the initial state
    lat = Lattice.lieb(4)
    spec = make_target_spec("toric_code", lat)
    params = ProtocolParams(p_u=1.0, p_m=1.0)
    backend = make_backend(lat, params)
    step_lieb(backend, lat, params, 1,
              forced_factory([0] * len(lat.measured_sites)))
    v_signs, p_signs = toric_sector(backend.state, spec)
    assert np.all(v_signs == v_signs[0])
    assert np.all(p_signs == 1)


def test_toric_sector_before_firing_raises():
    lat = Lattice.lieb(2)
    spec = make_target_spec("toric_code", lat)
    t = Tableau(lat.n_sites, Basis.MINUS_X)
    with pytest.raises(ValueError):
        toric_sector(t, spec)


def test_flipping_one_outcome_flips_two_vertices(forced_factory):
    # the last corner measurement is determined by the others (the corner
    # X parity is a cluster-state symmetry), so one flipped coin flips the
    # forced site and the dependent one: exactly two vertex signs change
    lat = Lattice.lieb(4)
    spec = make_target_spec("toric_code", lat)
    params = ProtocolParams(p_u=1.0, p_m=1.0)
    n_meas = len(lat.measured_sites)

    base_bits = [0] * n_meas
    backend = make_backend(lat, params)
    step_lieb(backend, lat, params, 1, forced_factory(base_bits))
    v0, p0 = toric_sector(backend.state, spec)
    assert np.all(p0 == 1)

    for flip_at in (0, 3, 7):
        flipped = list(base_bits)
        flipped[flip_at] = 1
        backend = make_backend(lat, params)
        step_lieb(backend, lat, params, 1, forced_factory(flipped))
        v1, p1 = toric_sector(backend.state, spec)
        assert np.all(p1 == 1)
        changed = np.nonzero(v1 != v0)[0]
        assert len(changed) == 2


def test_lieb_vertex_sign_product_is_plus_one():
    for seed in range(5):
        lat, state = exact_lieb_state(4, seed=seed)
        spec = make_target_spec("toric_code", lat)
        v_signs, _ = toric_sector(state, spec)
        assert np.prod(v_signs) == 1
