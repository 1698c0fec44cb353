"""Tests for the closed-form rate engine and the benchmark bounds."""

import math
from dataclasses import replace

import numpy as np
import pytest

from ionqkd import (
    ArchitectureMismatchError,
    ArchitectureSpec,
    Conventions,
    RepeaterParams,
    binary_entropy,
    chain_success_prob,
    cycle_time,
    evaluate_point,
    link_success_prob,
    plob_rate,
    prob_links,
    raw_rate_type1,
    raw_rate_type2,
    rci,
    secret_key_rate,
)
from ionqkd.rates import raw_rate_curve

import oracles

# frozen reference values, computed at 40-digit precision from the defining
# expressions
P_LINK_TABLE = 0.4303539882125289        # link success at eta_c=1, L0=3
P_CHAIN_TABLE = 0.88134308908474954      # 14 attempts, 1000/3 links
RAW1_2T_TABLE = 1390.1310553387217       # bits/s under the 2T denominator
RAW1_T_TABLE = 2780.2621106774434
RAW2_TABLE = 14388.26582959639           # m=10, n_eg=3, same geometry
RSEC_2T_TABLE = 565.30925535197311
H_REF = 0.29668119838878904              # binary_entropy(0.052442)
SKR_REF = 565.22626847916648             # 1390 * (1 - 2 * H_REF)
RCI_01 = 0.15241532017542615
RCI_TWO_THIRDS = -0.58496250072115618    # = 1 - log2(3)
PLOB_REF = 875.1376201390435             # eta_c=0.3, L=100 km, 1 MHz source

TABLE_PARAMS = RepeaterParams(
    L_tot=1000.0, L0=3.0, eta_c=1.0, eps_g=1e-4, F0=1 - 1e-4, t0=1e-6, n_eg=14,
)


class TestChainSuccessProb:
    def test_deterministic_links(self):
        assert chain_success_prob(1.0, 1, 5.0) == 1.0
        assert chain_success_prob(1.0, 1, 333.33) == 1.0

    def test_dead_links(self):
        assert chain_success_prob(0.0, 10, 4.0) == 0.0

    def test_table_geometry(self):
        p = link_success_prob(1.0, 3.0, 20.0)
        assert p == pytest.approx(P_LINK_TABLE, rel=1e-14)
        assert chain_success_prob(p, 14, 1000.0 / 3.0) == pytest.approx(
            P_CHAIN_TABLE, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            chain_success_prob(1.2, 1, 5)
        with pytest.raises(ValueError):
            chain_success_prob(0.5, 0, 5)
        with pytest.raises(ValueError):
            chain_success_prob(0.5, 1, 0.5)


class TestCycleTime:
    def test_short_spacing_limit(self):
        # only the gate and measurement time remains
        assert cycle_time(1e-12, 5, 1e-6, 2e5) == pytest.approx(2e-6, rel=1e-3)

    def test_reference_values(self):
        assert cycle_time(3.0, 14, 1e-6, 2e5) == pytest.approx(3.17e-4,
                                                               rel=1e-12)
        assert cycle_time(20.0, 1, 0.0, 2e5) == pytest.approx(1.5e-4,
                                                              rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            cycle_time(-1.0, 1, 1e-6, 2e5)
        with pytest.raises(ValueError):
            cycle_time(3.0, 0, 1e-6, 2e5)
        with pytest.raises(ValueError):
            cycle_time(3.0, 1, -1e-6, 2e5)
        with pytest.raises(ValueError):
            cycle_time(3.0, 1, 1e-6, 0.0)


class TestRawRateType1:
    def test_certain_success_rate(self):
        # with every link certain, the rate is set purely by the cycle time
        params = replace(TABLE_PARAMS, eta_c=1.0, L0=3.0, n_eg=200)
        R_raw, P, T = raw_rate_type1(params)
        assert P == pytest.approx(1.0, abs=1e-12)
        assert R_raw == pytest.approx(1.0 / (2 * T), rel=1e-9)

    def test_table_point_both_conventions(self):
        R_2T, P, T = raw_rate_type1(TABLE_PARAMS)
        assert P == pytest.approx(P_CHAIN_TABLE, rel=1e-12)
        assert T == pytest.approx(3.17e-4, rel=1e-12)
        assert R_2T == pytest.approx(RAW1_2T_TABLE, rel=1e-12)
        R_T, _, _ = raw_rate_type1(TABLE_PARAMS,
                                   Conventions(type1_denominator="T"))
        assert R_T == pytest.approx(RAW1_T_TABLE, rel=1e-12)

    def test_alternate_convention_reconstructs_published_rate(self):
        # P/T times the secret fraction lands within 1% of the published
        # 1125 bits/s for this column
        report = evaluate_point(TABLE_PARAMS, ArchitectureSpec.type_i(),
                                Conventions(type1_denominator="T"))
        assert report.R_sec == pytest.approx(1125.0, rel=0.01)

    def test_rejects_multi_ion_params(self):
        with pytest.raises(ArchitectureMismatchError):
            raw_rate_type1(replace(TABLE_PARAMS, m=10))


class TestProbLinks:
    def test_all_fail(self):
        assert prob_links(3, 0, 4, 0.3) == pytest.approx(
            0.7 ** 12, rel=1e-12)

    def test_single_pair_reduces_to_link_success(self):
        assert prob_links(1, 1, 5, 0.3) == pytest.approx(
            1 - 0.7 ** 5, rel=1e-12)

    def test_two_pairs_single_round(self):
        p = 0.37
        assert prob_links(2, 1, 1, p) == pytest.approx(2 * p * (1 - p),
                                                       rel=1e-12)

    def test_distribution_normalizes(self):
        total = sum(prob_links(5, i, 3, 0.21) for i in range(6))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            prob_links(3, 4, 2, 0.3)
        with pytest.raises(ValueError):
            prob_links(3, -1, 2, 0.3)
        with pytest.raises(ValueError):
            prob_links(3, 1, 2, 1.3)


class TestRawRateType2:
    def test_certain_success_rate(self):
        params = replace(TABLE_PARAMS, m=10, n_eg=50)
        R_raw, P, T = raw_rate_type2(params)
        assert P == pytest.approx(1.0, abs=1e-12)
        assert R_raw == pytest.approx(1.0 / T, rel=1e-9)

    def test_table_point(self):
        params = replace(TABLE_PARAMS, m=10, n_eg=3)
        R_raw, P, T = raw_rate_type2(params)
        assert R_raw == pytest.approx(RAW2_TABLE, rel=1e-12)
        assert R_raw == pytest.approx(1.44e4, rel=2e-3)

    def test_single_pair_bracket_reduces_to_chain_formula(self):
        # the multi-pair bracket with one pair is the single-link success law
        p, n = 0.3, 7
        assert 1 - prob_links(1, 0, n, p) == pytest.approx(
            1 - (1 - p) ** n, rel=1e-12)

    def test_degenerate_single_pair_rate_is_twice_type1(self):
        # the multi-pair formula evaluated with one pair equals the
        # sequential rate up to exactly the sequential factor of 2
        params = TABLE_PARAMS
        p = link_success_prob(params.eta_c, params.L0, params.L_att)
        n_links = params.L_tot / params.L0
        T = cycle_time(params.L0, params.n_eg, params.t0, params.c)
        single_pair_rate = (1 - prob_links(1, 0, params.n_eg, p)) ** n_links / T
        R_2T, _, _ = raw_rate_type1(params)
        assert single_pair_rate == pytest.approx(2.0 * R_2T, rel=1e-12)

    def test_split_pairing_uses_half_the_ions(self):
        params = replace(TABLE_PARAMS, m=10, n_eg=3)
        R_full, P_full, _ = raw_rate_type2(params)
        R_split, P_split, _ = raw_rate_type2(
            params, Conventions(type2_pairing="split"))
        p = link_success_prob(params.eta_c, params.L0, params.L_att)
        expect = (1 - (1 - p) ** 15) ** (1000 / 3)
        assert P_split == pytest.approx(expect, rel=1e-12)
        assert P_split < P_full

    def test_rejects_single_ion_params(self):
        with pytest.raises(ArchitectureMismatchError):
            raw_rate_type2(TABLE_PARAMS)


class TestBinaryEntropy:
    def test_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_maximum(self):
        assert binary_entropy(0.5) == 1.0

    def test_reference_value(self):
        assert binary_entropy(0.052442) == pytest.approx(H_REF, rel=1e-12)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            binary_entropy(-0.1)
        with pytest.raises(ValueError):
            binary_entropy(1.1)


class TestSecretKeyRate:
    def test_error_free(self):
        assert secret_key_rate(123.0, 0.0) == 123.0

    def test_clamps_to_zero(self):
        assert secret_key_rate(123.0, 0.25) == 0.0
        # just above the cutoff QBER
        assert secret_key_rate(123.0, 0.111) == 0.0
        # just below it
        assert secret_key_rate(123.0, 0.109) > 0.0

    def test_reference_value(self):
        assert secret_key_rate(1390.0, 0.052442) == pytest.approx(SKR_REF,
                                                                  rel=1e-12)


class TestRci:
    def test_perfect_pair(self):
        assert rci(0.0) == 1.0

    def test_reference_value(self):
        assert rci(0.1) == pytest.approx(RCI_01, rel=1e-12)

    def test_boundary_value(self):
        # first log term vanishes; the remainder is 1 + log2(1/3)
        assert rci(2.0 / 3.0) == pytest.approx(RCI_TWO_THIRDS, rel=1e-12)

    def test_matches_entropy_oracle(self):
        for Q in (1e-4, 0.01, 0.05, 0.11, 0.3, 0.5):
            assert rci(Q) == pytest.approx(oracles.rci_entropy_oracle(Q),
                                           abs=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            rci(0.7)


class TestPlobRate:
    def test_zero_coupling(self):
        assert plob_rate(0.0, 100.0) == 0.0

    def test_half_transmittivity(self):
        # eta = 0.5 gives exactly one bit per use
        L_half = 20.0 * math.log(2.0)
        assert plob_rate(1.0, L_half, 20.0, 1e6) == pytest.approx(1e6,
                                                                  rel=1e-12)

    def test_reference_value(self):
        assert plob_rate(0.3, 100.0, 20.0, 1e6) == pytest.approx(PLOB_REF,
                                                                 rel=1e-12)

    def test_tiny_transmittivity_does_not_underflow(self):
        assert plob_rate(1.0, 1000.0) > 0.0

    def test_unit_transmittivity_rejected(self):
        with pytest.raises(ValueError):
            plob_rate(1.0, 0.0)


class TestEvaluatePoint:
    def test_perfect_point(self):
        params = RepeaterParams(L_tot=100.0, L0=10.0, eta_c=1.0, n_eg=30)
        report = evaluate_point(params, ArchitectureSpec.type_i())
        assert report.Q == 0.0
        assert report.secret_fraction == 1.0
        assert report.R_sec == report.R_raw
        assert not report.zero_key

    def test_table_column_within_factor_two(self):
        report = evaluate_point(TABLE_PARAMS, ArchitectureSpec.type_i())
        assert report.R_sec == pytest.approx(RSEC_2T_TABLE, rel=1e-12)
        assert 1125.0 / 2 <= report.R_sec <= 1125.0 * 2

    def test_rci_rate_dominates_secret_rate(self):
        for eps_g in (1e-4, 5e-4, 1e-3, 2e-3):
            params = replace(TABLE_PARAMS, eps_g=eps_g)
            report = evaluate_point(params, ArchitectureSpec.type_i())
            if report.secret_fraction > 0:
                assert report.R_rci >= report.R_sec

    def test_zero_key_flag(self):
        params = RepeaterParams(L_tot=1000.0, L0=2.0, eta_c=0.3,
                                eps_g=5e-3, F0=1 - 5e-3, n_eg=100)
        report = evaluate_point(params, ArchitectureSpec.type_i())
        assert report.secret_fraction == 0.0
        assert report.R_sec == 0.0
        assert report.zero_key

    def test_architecture_consistency_enforced(self):
        with pytest.raises(ArchitectureMismatchError):
            evaluate_point(TABLE_PARAMS, ArchitectureSpec.type_ii(10))

    def test_type_ii_dispatch(self):
        params = replace(TABLE_PARAMS, m=10, n_eg=3)
        report = evaluate_point(params, ArchitectureSpec.type_ii(10))
        assert report.R_raw == pytest.approx(RAW2_TABLE, rel=1e-12)


class TestRawRateCurve:
    def test_matches_scalar_type1(self):
        n_values = np.array([1, 5, 14, 100])
        curve = raw_rate_curve(TABLE_PARAMS, ArchitectureSpec.type_i(),
                               n_values)
        for n, expected in zip(n_values, curve):
            scalar, _, _ = raw_rate_type1(replace(TABLE_PARAMS, n_eg=int(n)))
            assert expected == pytest.approx(scalar, rel=1e-12)

    def test_matches_scalar_type2(self):
        params = replace(TABLE_PARAMS, m=10)
        conv = Conventions(type2_pairing="split")
        n_values = np.array([1, 3, 7])
        curve = raw_rate_curve(params, ArchitectureSpec.type_ii(10), n_values,
                               conv)
        for n, expected in zip(n_values, curve):
            scalar, _, _ = raw_rate_type2(replace(params, n_eg=int(n)), conv)
            assert expected == pytest.approx(scalar, rel=1e-12)
