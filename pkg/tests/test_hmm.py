import numpy as np
import pytest

from qviterbi.convcode import ConvCode
from qviterbi.hmm import Hmm, dump_hmm, load_hmm


def uniform_hmm(num_states=2, emissions=("a",), emit_value=1.0):
    p = 1.0 / num_states
    trans = {(i, j, y): p for i in range(num_states) for j in range(num_states) for y in emissions}
    emit = {key: emit_value for key in trans}
    return Hmm(num_states, emissions, trans, emit)


class TestJointProb:
    def test_identity_case(self):
        h = Hmm(1, ("a",), {(0, 0, "a"): 1.0}, {(0, 0, "a"): 1.0})
        assert h.joint_prob(0, 0, "a") == 1.0

    def test_direct_product(self):
        h = Hmm(1, ("a",), {(0, 0, "a"): 0.5}, {(0, 0, "a"): 0.5})
        assert h.joint_prob(0, 0, "a") == 0.25

    def test_code_hmm_emission_and_joint(self, hmm01):
        # per-bit BSC independence: two clean bits carry (0.9)^2
        assert hmm01.emit[(0, 0, "00")] == pytest.approx(0.81, abs=1e-15)
        # uniform message prior 1/2 multiplies in
        assert hmm01.joint_prob(0, 0, "00") == pytest.approx(0.405, abs=1e-15)

    def test_absent_entry_reads_zero(self, hmm01):
        # state 00 cannot reach state 11 in one step
        assert hmm01.joint_prob(0, 3, "00") == 0.0

    def test_domain_errors(self, hmm01):
        with pytest.raises(ValueError):
            hmm01.joint_prob(0, 99, "00")
        with pytest.raises(ValueError):
            hmm01.joint_prob(-1, 0, "00")
        with pytest.raises(ValueError):
            hmm01.joint_prob(0, 0, "banana")

    def test_multiplicative_consistency_random_tables(self):
        rng = np.random.default_rng(5)
        emissions = ("x", "y")
        keys = [(i, j, y) for i in range(3) for j in range(3) for y in emissions]
        trans = {k: float(rng.uniform(0, 1)) for k in keys}
        emit = {k: float(rng.uniform(0, 1)) for k in keys}
        h = Hmm(3, emissions, trans, emit, initial=[1.0, 0.0, 0.0])
        for k in keys:
            assert h.joint_prob(*k) == trans[k] * emit[k]


class TestRowStochastic:
    def test_valid_model_passes(self):
        check = uniform_hmm().check_row_stochastic()
        assert check.passed and check.residual <= 1e-12

    def test_scaled_row_fails_with_residual(self):
        trans = {(0, 0, "a"): 0.25, (0, 1, "a"): 0.25, (1, 0, "a"): 0.5, (1, 1, "a"): 0.5}
        emit = {k: 1.0 for k in trans}
        check = Hmm(2, ("a",), trans, emit).check_row_stochastic()
        assert not check.passed
        assert check.residual == pytest.approx(0.5, abs=1e-15)
        assert check.worst_row == (0, "a")

    def test_code_hmm_passes_across_epsilon(self, code):
        for eps in (0.01, 0.05, 0.1, 0.2, 0.3, 0.45, 0.499):
            assert code.to_hmm(eps).check_row_stochastic().passed


class TestDoublyNormalized:
    def test_unit_emissions_pass(self):
        assert uniform_hmm().check_doubly_normalized()

    def test_code_hmm_fails(self, hmm01):
        # from state 00 on receive block 00 the joint row sums to
        # 0.5*0.81 + 0.5*0.01 = 0.41, far from 1
        assert not hmm01.check_doubly_normalized()

    def test_uniform_two_state_passes(self):
        assert uniform_hmm(2).check_doubly_normalized()


class TestFanout:
    def test_identity_chain(self):
        trans = {(i, (i + 1) % 4, "a"): 1.0 for i in range(4)}
        emit = {k: 1.0 for k in trans}
        report = Hmm(4, ("a",), trans, emit).fanout()
        assert report.fanout == 1
        assert all(v == 1 for v in report.per_state.values())

    def test_code_hmm(self, hmm01):
        assert hmm01.fanout().fanout == 2

    def test_complete_four_state(self):
        assert uniform_hmm(4).fanout().fanout == 4

    def test_fanout_is_two_to_the_k(self):
        wide = ConvCode(k=2, n=3, m=1, generators=((1, 2, 3), (3, 1, 2)))
        assert wide.to_hmm(0.1).fanout().fanout == 4 == wide.fanout


class TestConstruction:
    def test_default_initial_is_point_mass(self, hmm01):
        assert hmm01.initial[0] == 1.0 and hmm01.initial[1:].sum() == 0.0

    def test_initial_must_sum_to_one(self):
        with pytest.raises(ValueError):
            uniform = uniform_hmm()
            Hmm(2, ("a",), uniform.trans, uniform.emit, initial=[0.5, 0.4])

    def test_probability_range_enforced(self):
        with pytest.raises(ValueError):
            Hmm(1, ("a",), {(0, 0, "a"): 1.5}, {})
        with pytest.raises(ValueError):
            Hmm(1, ("a",), {}, {(0, 0, "a"): -0.1})

    def test_bad_key_rejected(self):
        with pytest.raises(ValueError):
            Hmm(1, ("a",), {(0, 1, "a"): 1.0}, {})
        with pytest.raises(ValueError):
            Hmm(1, ("a",), {(0, 0, "b"): 1.0}, {})


class TestJson:
    def test_roundtrip(self, hmm01):
        clone = Hmm.from_json_dict(hmm01.to_json_dict())
        assert clone.trans == hmm01.trans
        assert clone.emit == hmm01.emit
        assert clone.emissions == hmm01.emissions
        assert np.array_equal(clone.initial, hmm01.initial)

    def test_file_roundtrip(self, hmm01, tmp_path):
        path = tmp_path / "model.json"
        dump_hmm(hmm01, path)
        clone = load_hmm(path)
        assert clone.trans == hmm01.trans
        assert clone.check_row_stochastic().passed

    def test_document_shape(self, hmm01):
        doc = hmm01.to_json_dict()
        assert set(doc) == {"num_states", "emissions", "trans", "emit", "initial"}
        i, j, y, p = doc["trans"][0]
        assert isinstance(i, int) and isinstance(y, str) and isinstance(p, float)
