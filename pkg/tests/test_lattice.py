"""Lattice geometry, stabilizers, fractal symmetries, kernel equality."""

import numpy as np
import pytest

from fractalmbqc import tensors as tz
from fractalmbqc.f2ca import CARule, symmetry_rank
from fractalmbqc.lattice import (
    LatticeSpec,
    Site,
    appendix_b_check,
    apply_pauli_dense,
    build_cluster_state_small,
    neighbors,
    periodic_symmetry_basis,
    stabilizers,
    symmetry_from_seed,
    symmetry_stabilizer_completion,
    tn_physical_permutation,
)


def test_neighbors_examples():
    spec = LatticeSpec("sc", 3, 3)
    nb = neighbors(spec, Site(0, 1, "a"))
    assert {(s.i, s.j, s.alpha) for s in nb} == {(0, 0, "b"), (0, 1, "b"), (1, 1, "b")}
    spec_fc = LatticeSpec("fc", 4, 3)
    assert len(neighbors(spec_fc, Site(0, 1, "a"))) == 4
    # sc bulk coordination number 3
    for s in (Site(1, 1, "a"), Site(2, 1, "b")):
        assert len(neighbors(spec, s)) == 3
    with pytest.raises(ValueError):
        neighbors(spec, Site(0, 5, "a"))


def test_stabilizers_commute_and_count():
    for spec in (LatticeSpec("sc", 3, 3), LatticeSpec("fc", 4, 3)):
        gens = stabilizers(spec)
        assert len(gens) == 2 * spec.L * (spec.n_rows - 1)
        for a in gens:
            for b in gens:
                assert a.commutes_with(b)


def test_stabilizer_z_support_is_neighborhood():
    spec = LatticeSpec("sc", 3, 3)
    gens = stabilizers(spec)
    for g in gens:
        site_bit = g.xbits.bit_length() - 1
        j, rem = divmod(site_bit // 2, spec.L)
        alpha = "a" if site_bit % 2 == 0 else "b"
        s = Site(rem, j, alpha)
        z = 0
        for t in neighbors(spec, s):
            z |= 1 << spec.qubit_index(t)
        assert g.zbits == z


def test_sierpinski_trajectory():
    spec = LatticeSpec("sc", 3, 3)
    op = symmetry_from_seed(spec, "a", 0b001, 0)
    rows = []
    for j in range(3):
        w = 0
        for i in range(3):
            if (op.xbits >> (2 * (j * 3 + i))) & 1:
                w |= 1 << i
        rows.append(w)
    assert rows == [0b001, 0b011, 0b101]  # Pascal's triangle mod 2


def test_zero_seed_is_identity():
    spec = LatticeSpec("sc", 3, 3)
    assert symmetry_from_seed(spec, "a", 0, 0).is_identity()


def test_periodic_basis_counts_match_rank():
    for spec in (LatticeSpec("sc", 3, 3), LatticeSpec("fc", 4, 3), LatticeSpec("sc", 7, 2)):
        for sub in "ab":
            basis = periodic_symmetry_basis(spec, sub)
            assert len(basis) == symmetry_rank(CARule(spec.kind, spec.L))


def test_appendix_b_kernel_equality():
    for kind, L in (("sc", 3), ("fc", 4)):
        for rows in (2, 3, 4):
            for sub in "ab":
                rep = appendix_b_check(LatticeSpec(kind, L, rows), sub)
                assert rep["kernel_equals_span"], rep


def test_appendix_b_single_z_not_in_kernel():
    """A single-site Z pattern anticommutes with some fractal symmetry."""
    from fractalmbqc.f2ca import popcount_parity
    from fractalmbqc.lattice import _trajectory_rows

    spec = LatticeSpec("fc", 4, 3)
    single = 1 << (1 * spec.L + 2)  # a-site (2, row 1)
    hit = False
    for i in range(spec.L):
        rows = _trajectory_rows(spec, "a", 1 << i, 0)
        t = sum(rows[j] << (j * spec.L) for j in range(spec.n_rows))
        if popcount_parity(t & single):
            hit = True
    assert hit


def test_dense_cluster_state_stabilized():
    for spec in (LatticeSpec("sc", 3, 2), LatticeSpec("fc", 4, 2)):
        psi = build_cluster_state_small(spec)
        for g in stabilizers(spec):
            assert abs(np.vdot(psi, apply_pauli_dense(g, psi)) - 1) < 1e-12


def test_completed_symmetries_fix_the_state():
    for spec in (LatticeSpec("sc", 3, 2), LatticeSpec("fc", 4, 2), LatticeSpec("sc", 3, 3)):
        psi = build_cluster_state_small(spec)
        for sub in "ab":
            j0 = 0 if sub == "a" else spec.n_rows - 1
            if spec.kind == "fc":
                seeds = [1 << i for i in range(spec.L)]
            else:
                seeds = [(1 << i) | (1 << (i + 1)) for i in range(spec.L - 1)]
            for seed in seeds:
                S = symmetry_stabilizer_completion(spec, sub, seed, j0)
                assert np.linalg.norm(apply_pauli_dense(S, psi) - psi) < 1e-12


def test_tn_patch_matches_dense_state():
    for spec in (LatticeSpec("sc", 3, 2), LatticeSpec("fc", 4, 2)):
        psi = build_cluster_state_small(spec)
        tn = tz.patch_state_tn(spec.kind, spec.L, spec.n_rows)
        tn = tn / np.linalg.norm(tn)
        perm = tn_physical_permutation(spec)
        reordered = np.zeros_like(psi)
        reordered[perm] = psi
        assert abs(abs(np.vdot(tn, reordered)) - 1) < 1e-12


def test_dense_state_cap():
    with pytest.raises(ValueError):
        build_cluster_state_small(LatticeSpec("fc", 4, 4))
