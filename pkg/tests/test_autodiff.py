import numpy as np
import pytest

from decgan import autodiff as ad
from decgan.autodiff import (
    DimensionError,
    DomainError,
    Tensor,
    grad_check,
    load_tensors,
    save_tensors,
    sym_eig,
)


def tensor(rng, rows, cols, requires_grad=True, positive=False):
    data = rng.normal(size=(rows, cols))
    if positive:
        data = np.abs(data) + 0.5
    return Tensor(data, requires_grad=requires_grad)


def test_matmul_identity():
    m = np.arange(9.0).reshape(3, 3)
    out = ad.matmul(Tensor(np.eye(3)), Tensor(m))
    np.testing.assert_array_equal(out.data, m)


def test_sigmoid_at_zero():
    assert ad.sigmoid(Tensor(0.0)).item() == 0.5


def test_grad_matmul_square_vs_fd():
    rng = np.random.default_rng(7)
    X = tensor(rng, 4, 4, requires_grad=False)
    W = tensor(rng, 4, 4)

    def f():
        y = ad.matmul(X, W)
        return ad.full_sum(y * y)

    assert grad_check(f, [W], 1e-5) < 1e-4


# one scalar-valued probe per primitive; R makes degenerate reductions informative
PRIMITIVES = {
    "matmul": lambda a, b, R: ad.full_sum(ad.matmul(a, b) * R),
    "transpose": lambda a, b, R: ad.full_sum(ad.transpose(a) * ad.transpose(b)),
    "add": lambda a, b, R: ad.full_sum((a + b) * R),
    "sub": lambda a, b, R: ad.full_sum((a - b) * R),
    "hadamard": lambda a, b, R: ad.full_sum((a * b) * R),
    "smul": lambda a, b, R: ad.full_sum(ad.smul(a, 1.7) * R),
    "add_const": lambda a, b, R: ad.full_sum(ad.add_const(a * b, 0.3) * R),
    "row_sum": lambda a, b, R: ad.full_sum(ad.row_sum(a * b)),
    "col_sum": lambda a, b, R: ad.full_sum(ad.col_sum(a * b)),
    "mean": lambda a, b, R: ad.mean_all(a * b),
    "relu": lambda a, b, R: ad.full_sum(ad.relu(a) * R),
    "sigmoid": lambda a, b, R: ad.full_sum(ad.sigmoid(a) * R),
    "tanh": lambda a, b, R: ad.full_sum(ad.tanh(a) * R),
    "exp": lambda a, b, R: ad.full_sum(ad.exp(a) * R),
    "softmax_rows": lambda a, b, R: ad.full_sum(ad.softmax_rows(a) * R),
    "emin": lambda a, b, R: ad.full_sum(ad.emin(a, b) * R),
    "emax": lambda a, b, R: ad.full_sum(ad.emax(a, b) * R),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitive_gradients(name):
    fn = PRIMITIVES[name]
    for seed in range(8):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(2, 9, size=2)
        a = tensor(rng, rows, cols)
        b = tensor(rng, rows, cols)
        if name == "matmul":
            b = tensor(rng, cols, rows)
            R = Tensor(rng.normal(size=(rows, rows)))
        elif name == "transpose":
            R = None
        else:
            R = Tensor(rng.normal(size=(rows, cols)))
        assert grad_check(lambda: fn(a, b, R), [a, b], 1e-5) < 1e-4, f"{name} seed {seed}"


def test_primitive_gradients_random_sweep():
    # randomized 2x2..8x8 inputs across many seeds, all primitives sharing each draw
    names = sorted(PRIMITIVES)
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        name = names[seed % len(names)]
        fn = PRIMITIVES[name]
        rows, cols = rng.integers(2, 9, size=2)
        a = tensor(rng, rows, cols)
        b = tensor(rng, cols, rows) if name == "matmul" else tensor(rng, rows, cols)
        if name == "matmul":
            R = Tensor(rng.normal(size=(rows, rows)))
        elif name == "transpose":
            R = None
        else:
            R = Tensor(rng.normal(size=(rows, cols)))
        assert grad_check(lambda: fn(a, b, R), [a, b], 1e-5) < 1e-4, f"{name} seed {seed}"


def test_log_gradient_and_domain():
    rng = np.random.default_rng(3)
    a = tensor(rng, 4, 3, positive=True)
    R = Tensor(rng.normal(size=(4, 3)))
    assert grad_check(lambda: ad.full_sum(ad.log(a) * R), [a], 1e-6) < 1e-4
    with pytest.raises(DomainError):
        ad.log(Tensor([[1.0, -2.0]]))
    with pytest.raises(DomainError):
        ad.log(Tensor([[0.0]]))


def test_safe_pow_gradient_and_zero_convention():
    rng = np.random.default_rng(4)
    a = tensor(rng, 4, 4, positive=True)
    R = Tensor(rng.normal(size=(4, 4)))
    assert grad_check(lambda: ad.full_sum(ad.safe_pow(a, -0.5) * R), [a], 1e-5) < 1e-4
    z = Tensor([[0.0, 4.0], [-1.0, 9.0]], requires_grad=True)
    out = ad.safe_pow(z, -0.5)
    np.testing.assert_array_equal(out.data, [[0.0, 0.5], [0.0, 1.0 / 3.0]])
    ad.full_sum(out).backward()
    assert z.grad[0, 0] == 0.0 and z.grad[1, 0] == 0.0


def test_scale_and_bias_gradients():
    rng = np.random.default_rng(5)
    a = tensor(rng, 5, 3)
    v = tensor(rng, 5, 1)
    w = tensor(rng, 1, 3)
    R = Tensor(rng.normal(size=(5, 3)))
    assert grad_check(lambda: ad.full_sum(ad.scale_rows(a, v) * R), [a, v], 1e-5) < 1e-4
    assert grad_check(lambda: ad.full_sum(ad.scale_cols(a, w) * R), [a, w], 1e-5) < 1e-4
    assert grad_check(lambda: ad.full_sum(ad.add_row_bias(a, w) * R), [a, w], 1e-5) < 1e-4


def test_masked_select_gradient():
    rng = np.random.default_rng(6)
    a = tensor(rng, 4, 4)
    mask = rng.random((4, 4)) < 0.4
    mask[0, 0] = True  # never empty
    R = Tensor(rng.normal(size=(int(mask.sum()), 1)))
    assert grad_check(lambda: ad.full_sum(ad.masked_select(a, mask) * R), [a], 1e-5) < 1e-4


def test_hstack_and_sym_from_upper_gradients():
    rng = np.random.default_rng(8)
    a = tensor(rng, 5, 1)
    b = tensor(rng, 5, 2)
    R = Tensor(rng.normal(size=(5, 3)))
    assert grad_check(lambda: ad.full_sum(ad.hstack_cols([a, b]) * R), [a, b], 1e-5) < 1e-4
    u = tensor(rng, 6, 1)  # n=4 -> 6 strict upper entries
    R2 = Tensor(rng.normal(size=(4, 4)))
    assert grad_check(lambda: ad.full_sum(ad.sym_from_upper(u, 4) * R2), [u], 1e-5) < 1e-4
    built = ad.sym_from_upper(u, 4)
    np.testing.assert_array_equal(built.data, built.data.T)
    assert np.all(np.diag(built.data) == 0.0)


def test_straight_through_contract():
    soft = Tensor([[0.9], [0.2], [0.7]], requires_grad=True)
    hard = np.array([[1.0], [0.0], [1.0]])
    out = ad.straight_through(soft, hard)
    np.testing.assert_array_equal(out.data, hard)
    ad.full_sum(out * Tensor([[2.0], [3.0], [5.0]])).backward()
    np.testing.assert_array_equal(soft.grad, [[2.0], [3.0], [5.0]])


def test_shape_mismatch_raises():
    a = Tensor(np.zeros((2, 3)))
    b = Tensor(np.zeros((3, 3)))
    with pytest.raises(DimensionError):
        ad.add(a, b)
    with pytest.raises(DimensionError):
        ad.matmul(a, Tensor(np.zeros((2, 2))))


def test_nonfinite_rejected_at_construction():
    with pytest.raises(DomainError):
        Tensor([[np.nan]])
    with pytest.raises(DomainError):
        Tensor([[np.inf, 1.0]])


def test_replay_determinism():
    def run():
        rng = np.random.default_rng(11)
        X = Tensor(rng.normal(size=(5, 5)))
        W = Tensor(rng.normal(size=(5, 5)), requires_grad=True)
        y = ad.relu(ad.matmul(X, W))
        loss = ad.full_sum(ad.sigmoid(y) * y)
        loss.backward()
        return loss.item(), W.grad.copy()

    l1, g1 = run()
    l2, g2 = run()
    assert l1 == l2
    np.testing.assert_array_equal(g1, g2)


def test_gradient_accumulates_over_shared_use():
    x = Tensor([[2.0]], requires_grad=True)
    y = x + x  # two uses of the same leaf
    ad.full_sum(y).backward()
    assert x.grad[0, 0] == 2.0


# -- sym_eig ----------------------------------------------------------------

def test_sym_eig_diagonal():
    pair = sym_eig(Tensor(np.diag([3.0, 1.0, 2.0])))
    np.testing.assert_allclose(pair.eigenvalues.data.ravel(), [1.0, 2.0, 3.0], atol=1e-12)


def test_sym_eig_closed_form_2x2():
    pair = sym_eig(Tensor([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(pair.eigenvalues.data.ravel(), [-1.0, 1.0], atol=1e-12)


def _random_symmetric_with_gap(rng, n, min_gap=0.1):
    while True:
        m = rng.normal(size=(n, n))
        m = (m + m.T) / 2.0
        lam = np.linalg.eigvalsh(m)
        if np.diff(lam).min() > min_gap:
            return m


def test_sym_eig_invariants():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        m = rng.normal(size=(n, n))
        m = (m + m.T) / 2.0
        pair = sym_eig(Tensor(m))
        lam = pair.eigenvalues.data.ravel()
        V = pair.eigenvectors
        assert np.all(np.diff(lam) >= 0.0)
        assert np.abs(V.T @ V - np.eye(n)).max() < 1e-8
        assert np.abs(m @ V - V * lam).max() < 1e-8
        denom = max(np.linalg.norm(m), 1e-30)
        assert np.linalg.norm(m - V @ np.diag(lam) @ V.T) / denom < 1e-8
        assert abs(np.trace(m) - lam.sum()) < 1e-8


def test_sym_eig_eigenvalue_gradients_vs_fd():
    rng = np.random.default_rng(17)
    m = _random_symmetric_with_gap(rng, 5)
    t = Tensor(m, requires_grad=True)
    for i in range(5):
        sel = np.zeros((5, 1), dtype=bool)
        sel[i, 0] = True

        def f():
            return ad.masked_select(sym_eig(t).eigenvalues, sel)

        assert grad_check(f, [t], 1e-5) < 1e-4, f"eigenvalue {i}"


def test_sym_eig_degenerate_gradient_zeroed():
    t = Tensor(np.eye(3), requires_grad=True)
    lam = sym_eig(t).eigenvalues
    ad.full_sum(lam).backward()
    np.testing.assert_array_equal(t.grad, np.zeros((3, 3)))


def test_sym_eig_rejects_nonsquare_and_oversize():
    with pytest.raises(DimensionError):
        sym_eig(Tensor(np.zeros((2, 3))))
    with pytest.raises(DimensionError):
        sym_eig(Tensor(np.zeros((257, 257))))


# -- grad_check contract ----------------------------------------------------

def test_grad_check_linear_exact():
    rng = np.random.default_rng(19)
    x = tensor(rng, 3, 3)
    assert grad_check(lambda: ad.full_sum(x), [x], 1e-5) <= 1e-10


def test_grad_check_sigmoid_chain():
    rng = np.random.default_rng(23)
    X = tensor(rng, 3, 3, requires_grad=False)
    W = tensor(rng, 3, 3)
    assert grad_check(lambda: ad.full_sum(ad.sigmoid(ad.matmul(X, W))), [W], 1e-5) < 1e-4


def test_grad_check_lambda_max_of_symmetrized():
    rng = np.random.default_rng(29)
    m = _random_symmetric_with_gap(rng, 4)
    t = Tensor(m + rng.normal(scale=0.01, size=(4, 4)), requires_grad=True)
    sel = np.zeros((4, 1), dtype=bool)
    sel[3, 0] = True

    def f():
        return ad.masked_select(sym_eig(t).eigenvalues, sel)

    assert grad_check(f, [t], 1e-5) < 1e-4


def test_grad_check_rejects_nonscalar_and_bad_epsilon():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(DimensionError):
        grad_check(lambda: x + x, [x], 1e-5)
    with pytest.raises(ValueError):
        grad_check(lambda: ad.full_sum(x), [x], 1e-2)


# -- serialization ----------------------------------------------------------

def test_tensor_container_round_trip(tmp_path):
    rng = np.random.default_rng(31)
    named = {
        "weights/layer0": rng.normal(size=(4, 7)),
        "bias": rng.normal(size=(1, 7)),
        "scalar": np.array([[3.25]]),
    }
    path = tmp_path / "params.bin"
    save_tensors(path, named)
    loaded = load_tensors(path)
    assert list(loaded) == list(named)
    for key in named:
        np.testing.assert_array_equal(loaded[key], named[key])


def test_tensor_container_truncation_detected(tmp_path):
    path = tmp_path / "params.bin"
    save_tensors(path, {"w": np.ones((3, 3))})
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_tensors(path)


def test_no_grad_disables_tape():
    x = Tensor([[1.0]], requires_grad=True)
    with ad.no_grad():
        y = ad.sigmoid(x)
    assert not y.requires_grad
    assert y._parents == ()
