import numpy as np
import pytest

from pogame import gamecore as gc
from pogame import observables as obs
from pogame.qmat import I2, SIGMA_X, SIGMA_Z, phi_plus, proj


def random_setup(rng, n):
    def units(count):
        v = rng.normal(size=(count, 3))
        return v / np.linalg.norm(v, axis=1)[:, None]

    alice = tuple(obs.obs_from_bloch(v) for v in units(n))
    bob = tuple(obs.obs_from_bloch(v) for v in units(n))
    state = rng.normal(size=4) + 1j * rng.normal(size=4)
    state = state / np.linalg.norm(state)
    return gc.QuantumSetup(state=state, alice=alice, bob=bob)


def test_game_spec_winning_rule():
    spec = gc.GameSpec(3)
    assert spec.winning_output(1, 1, 0) == 1
    assert spec.winning_output(1, 1, 1) == 0
    assert spec.winning_output(1, 2, 0) == 0
    assert spec.winning_output(1, 2, 1) == 1
    assert spec.input_probability == pytest.approx(1 / 3)


def test_game_spec_rejects_even_n():
    with pytest.raises(ValueError):
        gc.GameSpec(4)


def test_bell_expression_structure():
    expr = gc.bell_expression(5)
    assert np.all(np.diag(expr.coefficients) == -1)
    assert np.sum(expr.coefficients == -1) == 5


def test_trine_behavior_diagonal_anticorrelation():
    beh = gc.behavior_from_setup(gc.setup_from_family(obs.trine()))
    for x in range(3):
        block = beh.table[x, x]
        assert block[0, 1] + block[1, 0] == pytest.approx(1.0, abs=1e-12)
        assert beh.correlator(x, x) == pytest.approx(-1.0, abs=1e-12)


def test_trine_behavior_off_diagonal_correlator():
    beh = gc.behavior_from_setup(gc.setup_from_family(obs.trine()))
    for x in range(3):
        for y in range(3):
            if x != y:
                assert beh.correlator(x, y) == pytest.approx(0.5, abs=1e-12)


def test_unbiased_setup_gives_uniform_behavior():
    setup = gc.QuantumSetup(state=phi_plus(), alice=(SIGMA_Z,) * 3, bob=(SIGMA_X,) * 3)
    beh = gc.behavior_from_setup(setup)
    assert np.allclose(beh.table, 0.25, atol=1e-12)


def test_bell_values():
    expr = gc.bell_expression(3)
    trine_beh = gc.behavior_from_setup(gc.setup_from_family(obs.trine()))
    assert gc.bell_value(expr, trine_beh) == pytest.approx(6.0, abs=1e-12)
    assert gc.bell_value(expr, gc.uniform_behavior(3)) == pytest.approx(0.0, abs=1e-15)

    expr5 = gc.bell_expression(5)
    beh5 = gc.behavior_from_setup(gc.setup_from_family(obs.family_n(5)))
    assert gc.bell_value(expr5, beh5) == pytest.approx(10.0, abs=1e-12)


def test_bell_value_size_mismatch():
    with pytest.raises(ValueError):
        gc.bell_value(gc.bell_expression(3), gc.uniform_behavior(5))


def test_success_probabilities():
    expr = gc.bell_expression(3)
    trine_beh = gc.behavior_from_setup(gc.setup_from_family(obs.trine()))
    assert gc.success_probability(expr, trine_beh) == pytest.approx(5 / 6, abs=1e-12)
    assert gc.success_probability(expr, gc.uniform_behavior(3)) == pytest.approx(0.5, abs=1e-15)
    assert gc.success_probability_at(3, 4.0) == 13 / 18


def test_success_probability_two_routes_agree():
    rng = np.random.default_rng(17)
    spec3 = gc.GameSpec(3)
    expr3 = gc.bell_expression(3)
    for _ in range(25):
        beh = gc.behavior_from_setup(random_setup(rng, 3))
        assert abs(
            gc.success_probability(expr3, beh) - gc.success_probability_direct(spec3, beh)
        ) <= 1e-12
    beh5 = gc.behavior_from_setup(gc.setup_from_family(obs.family_five()))
    assert abs(
        gc.success_probability(gc.bell_expression(5), beh5)
        - gc.success_probability_direct(gc.GameSpec(5), beh5)
    ) <= 1e-12


def test_behaviors_are_no_signaling():
    rng = np.random.default_rng(29)
    for n in (3, 5):
        for _ in range(10):
            beh = gc.behavior_from_setup(random_setup(rng, n))
            assert beh.no_signaling_defect() <= 1e-12


def test_steered_states_trine_pure_and_complete():
    setup = gc.setup_from_family(obs.trine())
    states = gc.steered_states(setup)
    assert len(states) == 6
    by_x = {}
    for s in states:
        assert np.trace(s.rho @ s.rho).real == pytest.approx(1.0, abs=1e-12)
        assert s.probability == pytest.approx(0.5, abs=1e-12)
        by_x.setdefault(s.x, []).append(s.rho)
    for x, pair in by_x.items():
        assert np.allclose(pair[0] + pair[1], I2, atol=1e-12)


def test_steered_state_label_convention():
    # Label (x=1, a=1) has even parity and steers with the +1 projector.
    setup = gc.setup_from_family(obs.trine())
    states = {(s.x, s.a): s for s in gc.steered_states(setup)}
    assert np.allclose(states[(1, 1)].rho, (I2 + SIGMA_Z) / 2, atol=1e-12)
    assert states[(1, 1)].parity == 0


def test_steer_maximally_mixed_shared_state():
    states = gc.steer(np.eye(4, dtype=complex) / 4, obs.trine().alice)
    for s in states:
        assert np.allclose(s.rho, I2 / 2, atol=1e-12)


def test_steer_zero_probability_branch_flagged():
    # Product state |00>: the -1 branch of sigma_z on A never fires.
    state = np.array([1, 0, 0, 0], dtype=complex)
    states = {(s.x, s.a): s for s in gc.steer(proj(state), (SIGMA_Z,))}
    missing = states[(1, 0)]  # sign (-1)^(1+0) = -1
    assert missing.degenerate
    assert np.allclose(missing.rho, I2 / 2)
    assert missing.probability == 0.0


def test_operational_parity_trine_and_five():
    for fam in (obs.trine(), obs.family_five()):
        setup = gc.setup_from_family(fam)
        assert gc.check_operational_parity(gc.steered_states(setup)) <= 1e-12


def test_operational_parity_detects_perturbation():
    fam = obs.trine()
    angle = 0.1
    rot = np.array(
        [[np.cos(angle / 2), -np.sin(angle / 2)], [np.sin(angle / 2), np.cos(angle / 2)]],
        dtype=complex,
    )
    alice = (rot @ fam.alice[0] @ rot.conj().T,) + fam.alice[1:]
    setup = gc.QuantumSetup(state=phi_plus(), alice=alice, bob=fam.bob)
    assert gc.check_operational_parity(gc.steered_states(setup)) > 1e-3


def test_operational_parity_equals_observable_sum_norm():
    # On the maximally entangled state the two diagnostics coincide.
    rng = np.random.default_rng(31)
    for _ in range(10):
        vecs = rng.normal(size=(3, 3))
        vecs /= np.linalg.norm(vecs, axis=1)[:, None]
        alice = tuple(obs.obs_from_bloch(v) for v in vecs)
        setup = gc.QuantumSetup(state=phi_plus(), alice=alice, bob=alice)
        parity = gc.check_operational_parity(gc.steered_states(setup))
        sum_norm = np.linalg.norm(sum(alice), 2)
        assert parity == pytest.approx(sum_norm, abs=1e-10)


def test_behavior_validation_rejects_signaling():
    # Alice's marginal at x=1 depends on Bob's input: p(a=0|x,y=1) = 0.8 vs 0.5.
    table = np.full((3, 3, 2, 2), 0.25)
    table[0, 0] = [[0.6, 0.2], [0.1, 0.1]]
    with pytest.raises(ValueError):
        gc.Behavior(n=3, table=table).validate()


def test_csv_round_trip_bit_exact():
    beh = gc.behavior_from_setup(gc.setup_from_family(obs.trine()))
    text = gc.behavior_to_csv(beh)
    again = gc.behavior_from_csv(text)
    assert again.n == beh.n
    assert np.array_equal(again.table, beh.table)
    assert gc.behavior_to_csv(again) == text


def test_json_round_trip_bit_exact():
    rng = np.random.default_rng(37)
    beh = gc.behavior_from_setup(random_setup(rng, 5))
    text = gc.behavior_to_json(beh)
    again = gc.behavior_from_json(text)
    assert np.array_equal(again.table, beh.table)
    assert gc.behavior_to_json(again) == text


def test_csv_header_enforced():
    with pytest.raises(ValueError):
        gc.behavior_from_csv("a,b,c\n1,1,0")
