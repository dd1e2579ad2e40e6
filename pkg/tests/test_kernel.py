import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from archk.errors import EmptyInput, InvalidHyperparameter, NegativeDistance, SchemaError
from archk.kernel import (
    DimKernel,
    ExpQuad,
    KernelSpec,
    RationalQuad,
    cross_gram,
    dim_distance,
    gram,
    k_combined,
    k_dim,
    kappa,
    sample_kernel_spec,
)
from archk.space import sample_config, validate_space
from archk.verify import random_space

seeds = st.integers(0, 2**32 - 1)


def test_kappa_examples():
    assert kappa(ExpQuad(2.0, 1.0), 0.0) == 4.0
    assert kappa(ExpQuad(1.0, 1.0), 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert kappa(RationalQuad(1.0, 1.0, 1.0), 1.0) == pytest.approx(2 / 3, abs=1e-15)
    assert kappa(RationalQuad(3.0, 0.2, 5.0), 0.0) == pytest.approx(9.0, abs=1e-15)


def test_kappa_errors():
    with pytest.raises(NegativeDistance):
        kappa(ExpQuad(), -0.1)
    with pytest.raises(InvalidHyperparameter):
        ExpQuad(0.0, 1.0)
    with pytest.raises(InvalidHyperparameter):
        RationalQuad(1.0, 1.0, -2.0)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_kappa_non_increasing(a, b, sigma, lengthscale, alpha):
    lo, hi = sorted((a, b))
    for base in (ExpQuad(sigma, lengthscale), RationalQuad(sigma, lengthscale, alpha)):
        assert base(lo) >= base(hi) >= 0.0


def test_k_dim_examples(optimizer_space):
    spec = KernelSpec.shared(optimizer_space, ExpQuad(1.0, 1.0), gamma=1.0, rho=0.5)
    off1, off2 = {"A": "off"}, {"A": "off", "B": 0.9}
    on1, on2 = {"A": "on", "B": 0.25}, {"A": "on", "B": 0.25}
    assert k_dim(spec, "B", off1, off2) == 1.0
    assert k_dim(spec, "B", on1, off1) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert k_dim(spec, "B", on1, on2) == 1.0


def test_k_combined_examples(optimizer_space):
    x = {"A": "on", "B": 0.4}
    for comb, expected in (("sum", 2.0), ("product", 1.0)):
        spec = KernelSpec.shared(optimizer_space, combination=comb)
        assert k_combined(spec, x, x) == expected
    flat = validate_space({"dimensions": [{"id": "z", "type": "real", "lower": 0, "upper": 2}]})
    for comb in ("sum", "product"):
        spec = KernelSpec.shared(flat, RationalQuad(1.3, 0.7, 2.0), rho=0.8, combination=comb)
        a, b = {"z": 0.1}, {"z": 1.7}
        assert k_combined(spec, a, b) == k_dim(spec, "z", a, b)


def test_gram_examples(chain_space):
    spec = KernelSpec.shared(chain_space, ExpQuad(1.5, 0.7), gamma=0.8, rho=0.6)
    x = sample_config(chain_space, 4)
    K1 = gram(spec, [x])
    assert K1.entries.shape == (1, 1)
    assert K1.entries[0, 0] == k_combined(spec, x, x)
    K2 = gram(spec, [x, x]).entries
    kxx = k_combined(spec, x, x)
    assert np.all(K2 == kxx)
    np.testing.assert_allclose(np.linalg.eigvalsh(K2), [0.0, 2 * kxx], atol=1e-12)
    with pytest.raises(EmptyInput):
        gram(spec, [])


def test_gram_diagonal_is_sigma_combination(diamond_space):
    rng = np.random.default_rng(8)
    spec = sample_kernel_spec(diamond_space, rng, "sum")
    sig2 = [spec.dims[i].base.sigma ** 2 for i in diamond_space.ids]
    K = gram(spec, [sample_config(diamond_space, rng) for _ in range(6)]).entries
    np.testing.assert_allclose(np.diag(K), sum(sig2), rtol=1e-14)
    spec = sample_kernel_spec(diamond_space, rng, "product")
    sig2 = [spec.dims[i].base.sigma ** 2 for i in diamond_space.ids]
    K = gram(spec, [sample_config(diamond_space, rng) for _ in range(6)]).entries
    np.testing.assert_allclose(np.diag(K), np.prod(sig2), rtol=1e-14)


def test_gram_provenance(chain_space):
    spec = KernelSpec.shared(chain_space)
    xs = [sample_config(chain_space, s) for s in range(4)]
    a, b = gram(spec, xs), gram(spec, xs)
    assert a.config_digest == b.config_digest and a.spec_digest == b.spec_digest
    assert gram(spec, xs[:3]).config_digest != a.config_digest
    assert gram(spec.replace("C", rho=0.1), xs).spec_digest != a.spec_digest


def test_cross_gram(diamond_space):
    rng = np.random.default_rng(2)
    spec = sample_kernel_spec(diamond_space, rng, "product", "rq")
    A = [sample_config(diamond_space, rng) for _ in range(7)]
    B = [sample_config(diamond_space, rng) for _ in range(4)]
    assert np.array_equal(cross_gram(spec, A, A), gram(spec, A).entries)
    assert np.array_equal(cross_gram(spec, A, B), cross_gram(spec, B, A).T)
    assert cross_gram(spec, A[:1], B[:1])[0, 0] == k_combined(spec, A[0], B[0])


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from(["sum", "product"]), st.sampled_from(["eq", "rq"]))
def test_gram_psd(seed, combination, kind):
    rng = np.random.default_rng(seed)
    space = random_space(rng)
    spec = sample_kernel_spec(space, rng, combination, kind)
    K = gram(spec, [sample_config(space, rng) for _ in range(50)]).entries
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K)[0] >= -1e-8 * 50


@settings(max_examples=50, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=seeds)
def test_locality(assign_all, seed):
    rng = np.random.default_rng(seed)
    space = random_space(rng)
    spec = sample_kernel_spec(space, rng)
    x, xp = sample_config(space, rng), sample_config(space, rng)
    other = assign_all(space, rng)
    for i in space.ids:
        keep = space.ancestors(i) | {i}
        mutated = {k: v for k, v in other.items() if k not in keep}
        mutated.update({k: v for k, v in x.items() if k in keep})
        assert k_dim(spec, i, mutated, xp) == k_dim(spec, i, x, xp)


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from(["sum", "product"]))
def test_symmetry_and_cauchy_schwarz(seed, combination):
    rng = np.random.default_rng(seed)
    space = random_space(rng)
    spec = sample_kernel_spec(space, rng, combination, "rq")
    x, xp = sample_config(space, rng), sample_config(space, rng)
    kxy = k_combined(spec, x, xp)
    assert kxy == k_combined(spec, xp, x)
    assert kxy**2 <= k_combined(spec, x, x) * k_combined(spec, xp, xp) + 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.0, 1.0))
def test_hierarchy_decay(seed, shrink):
    rng = np.random.default_rng(seed)
    space = random_space(rng)
    spec = sample_kernel_spec(space, rng)
    x, xp = sample_config(space, rng), sample_config(space, rng)
    for j in space.ids:
        smaller = spec.replace(j, gamma=spec.dims[j].gamma * shrink)
        for i in space.descendants(j) | {j}:
            assert k_dim(smaller, i, x, xp) >= k_dim(spec, i, x, xp)
            assert dim_distance(smaller, i, x, xp) <= dim_distance(spec, i, x, xp)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_product_bound(seed):
    rng = np.random.default_rng(seed)
    space = random_space(rng)
    dims = {i: DimKernel(rng.random(), rng.random(), ExpQuad(1.0, 10 ** rng.uniform(-1, 1)))
            for i in space.ids}
    spec = KernelSpec(space, dims, "product")
    x, xp = sample_config(space, rng), sample_config(space, rng)
    k = k_combined(spec, x, xp)
    assert k <= 1.0
    all_zero = all(dim_distance(spec, i, x, xp) == 0.0 for i in space.ids)
    assert (k == 1.0) == all_zero
    assert k_combined(spec, x, x) == 1.0


def test_spec_from_dict(chain_space):
    spec = KernelSpec.from_dict(chain_space, {
        "combination": "sum",
        "default": {"gamma": 0.5, "kernel": {"type": "rq", "sigma": 2, "lengthscale": 0.3, "alpha": 1.5}},
        "dimensions": {"C": {"rho": 0.1, "kernel": {"type": "eq", "sigma": 1, "lengthscale": 1}}},
    })
    assert spec.dims["A"] == DimKernel(0.5, 0.5, RationalQuad(2.0, 0.3, 1.5))
    assert spec.dims["C"] == DimKernel(0.5, 0.1, ExpQuad(1.0, 1.0))
    assert spec.params["C"].omega == 0.125
    assert KernelSpec.from_dict(chain_space, spec.to_dict()) == spec


@pytest.mark.parametrize("raw", [
    {"combination": "max"},
    {"dimensions": {"Z": {}}},
    {"dimensions": {"A": {"gamma": 2.0}}},
    {"dimensions": {"A": {"weight": 1}}},
    {"default": {"kernel": {"type": "matern"}}},
    {"default": {"kernel": {"type": "eq", "alpha": 1}}},
    {"something": 1},
])
def test_spec_from_dict_rejects(chain_space, raw):
    with pytest.raises((SchemaError, InvalidHyperparameter, ValueError)):
        KernelSpec.from_dict(chain_space, raw)
