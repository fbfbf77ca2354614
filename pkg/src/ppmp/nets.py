"""Feed-forward networks with manual backprop, multihead outputs, Adam, and soft target updates.

Everything is float64 numpy. A network is a shared trunk of ReLU layers
followed by K independent linear heads with a configurable output
activation. All gradient code is hand-rolled; tests check it against
finite differences.
"""

import numpy as np

ACTIVATIONS = ("tanh", "identity")


class GradientFault(ArithmeticError):
    """Non-finite value met during backprop; carries the offending layer index."""

    def __init__(self, layer: int, what: str):
        super().__init__(f"non-finite {what} at layer {layer}")
        self.layer = layer


def _as_batch(x, dim: int, name: str):
    """Validate input and return (2-d view, was_single_row)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"{name} has shape {x.shape}, expected (*, {dim})")
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains non-finite values")
    return x, single


class Network:
    """ReLU trunk + K linear heads.

    hidden may be empty, in which case each head is a single linear map on
    the input. Heads share the trunk but have independent weights; `head`
    arguments select one (int) or all (None).
    """

    def __init__(self, n_in: int, hidden, n_out: int, n_heads: int = 1,
                 out_activation: str = "tanh", init_std: float = float(np.sqrt(1e-3)),
                 rng=None):
        if out_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {out_activation!r}")
        if n_heads < 1:
            raise ValueError("need at least one head")
        rng = np.random.default_rng(rng)
        self.n_in = int(n_in)
        self.hidden = tuple(int(h) for h in hidden)
        self.n_out = int(n_out)
        self.n_heads = int(n_heads)
        self.out_activation = out_activation
        sizes = (self.n_in, *self.hidden)
        self.trunk_w = [rng.normal(0.0, init_std, size=(sizes[i], sizes[i + 1]))
                        for i in range(len(self.hidden))]
        self.trunk_b = [np.zeros(sizes[i + 1]) for i in range(len(self.hidden))]
        feat = sizes[-1]
        # heads stacked: (K, feat, n_out) and (K, n_out)
        self.head_w = rng.normal(0.0, init_std, size=(self.n_heads, feat, self.n_out))
        self.head_b = np.zeros((self.n_heads, self.n_out))

    # -- parameter plumbing -------------------------------------------------

    def params(self):
        """Flat list of parameter arrays (views, mutable in place)."""
        out = []
        for w, b in zip(self.trunk_w, self.trunk_b):
            out.extend((w, b))
        out.extend((self.head_w, self.head_b))
        return out

    def copy(self) -> "Network":
        net = Network.__new__(Network)
        net.n_in, net.hidden, net.n_out = self.n_in, self.hidden, self.n_out
        net.n_heads, net.out_activation = self.n_heads, self.out_activation
        net.trunk_w = [w.copy() for w in self.trunk_w]
        net.trunk_b = [b.copy() for b in self.trunk_b]
        net.head_w = self.head_w.copy()
        net.head_b = self.head_b.copy()
        return net

    # -- forward ------------------------------------------------------------

    def _trunk(self, x):
        """Hidden activations; returns list [x, a1, ..., aL]."""
        acts = [x]
        for w, b in zip(self.trunk_w, self.trunk_b):
            x = np.maximum(x @ w + b, 0.0)
            acts.append(x)
        return acts

    def _out_act(self, z):
        return np.tanh(z) if self.out_activation == "tanh" else z

    def forward(self, x, head=None):
        """Evaluate the net.

        head=None returns all heads: (K, n_out) for a single input row,
        (B, K, n_out) for a batch. An int head returns (n_out,) / (B, n_out).
        """
        x2, single = _as_batch(x, self.n_in, "input")
        feat = self._trunk(x2)[-1]
        if head is None:
            z = np.einsum("bf,kfo->bko", feat, self.head_w) + self.head_b
        else:
            z = feat @ self.head_w[head] + self.head_b[head]
        y = self._out_act(z)
        return y[0] if single else y

    def value_and_cache(self, x, head=None):
        """forward() plus the cache needed by backward()."""
        x2, single = _as_batch(x, self.n_in, "input")
        acts = self._trunk(x2)
        feat = acts[-1]
        if head is None:
            z = np.einsum("bf,kfo->bko", feat, self.head_w) + self.head_b
        else:
            z = feat @ self.head_w[head] + self.head_b[head]
        y = self._out_act(z)
        cache = {"acts": acts, "y": y, "head": head, "single": single}
        return (y[0] if single else y), cache

    # -- backward -----------------------------------------------------------

    def _zero_grads(self):
        g = []
        for w, b in zip(self.trunk_w, self.trunk_b):
            g.extend((np.zeros_like(w), np.zeros_like(b)))
        g.extend((np.zeros_like(self.head_w), np.zeros_like(self.head_b)))
        return g

    def _head_delta(self, cache, upstream):
        """Upstream through the output activation. Shapes follow cache['y']."""
        if self.out_activation == "tanh":
            return upstream * (1.0 - cache["y"] ** 2)
        return upstream

    def _trunk_backward(self, acts, d_feat, grads):
        """Propagate d_feat back through the trunk, filling grads in place.

        Returns the gradient with respect to the network input.
        """
        d = d_feat
        for i in range(len(self.trunk_w) - 1, -1, -1):
            d = d * (acts[i + 1] > 0.0)
            grads[2 * i] += acts[i].T @ d
            grads[2 * i + 1] += d.sum(axis=0)
            d = d @ self.trunk_w[i].T
        return d

    def backward(self, cache, upstream, check: bool = False):
        """Gradients of sum_b <upstream_b, out_b> w.r.t. params and input.

        upstream must match the shape of the cached output. Returns
        (param_grads, input_grad). With check=True, raises GradientFault on
        the first non-finite intermediate (layer indexed from the input).
        """
        acts = cache["acts"]
        head = cache["head"]
        single = cache["single"]
        up = np.asarray(upstream, dtype=np.float64)
        if single:
            up = up[None, ...]
        if up.shape != cache["y"].shape:
            raise ValueError(f"upstream shape {up.shape} != output shape {cache['y'].shape}")
        dz = self._head_delta(cache, up)
        grads = self._zero_grads()
        feat = acts[-1]
        n_trunk = len(self.trunk_w)
        if head is None:
            grads[-2] += np.einsum("bf,bko->kfo", feat, dz)
            grads[-1] += dz.sum(axis=0)
            d_feat = np.einsum("bko,kfo->bf", dz, self.head_w)
        else:
            grads[-2][head] += feat.T @ dz
            grads[-1][head] += dz.sum(axis=0)
            d_feat = dz @ self.head_w[head].T
        if check and not np.isfinite(d_feat.sum()):
            raise GradientFault(n_trunk, "gradient")
        d_in = self._trunk_backward(acts, d_feat, grads)
        if check:
            for i in range(n_trunk - 1, -1, -1):
                if not (np.isfinite(grads[2 * i].sum()) and np.isfinite(grads[2 * i + 1].sum())):
                    raise GradientFault(i, "gradient")
            if not np.isfinite(d_in.sum()):
                raise GradientFault(0, "input gradient")
        return grads, (d_in[0] if single else d_in)

    def input_gradient(self, x, upstream, head=0):
        """d(sum <upstream, out>)/d(input) without touching parameter grads."""
        x2, single = _as_batch(x, self.n_in, "input")
        acts = self._trunk(x2)
        z = acts[-1] @ self.head_w[head] + self.head_b[head]
        y = self._out_act(z)
        up = np.asarray(upstream, dtype=np.float64)
        if single:
            up = up[None, :]
        dz = up * (1.0 - y ** 2) if self.out_activation == "tanh" else up
        d = dz @ self.head_w[head].T
        for i in range(len(self.trunk_w) - 1, -1, -1):
            d = d * (acts[i + 1] > 0.0)
            d = d @ self.trunk_w[i].T
        return d[0] if single else d


def gradients(net: Network, x, upstream, head=0):
    """Public single-call gradient op with non-finite checking."""
    _, cache = net.value_and_cache(x, head)
    return net.backward(cache, upstream, check=True)


class AdamState:
    """Adam moments for a fixed list of parameter arrays."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("lr must be positive")
        self.lr, self.beta1, self.beta2, self.eps = float(lr), beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.faults = 0


def adam_step(state: AdamState, params, grads) -> bool:
    """One Adam update in place. Non-finite gradients skip the update.

    Returns True when the update was applied, False when skipped (fault
    counted, step counter untouched).
    """
    if len(params) != len(state.m) or len(grads) != len(state.m):
        raise ValueError("params/grads do not match the Adam state")
    with np.errstate(invalid="ignore"):
        for g in grads:
            # sum() propagates NaN and keeps inf, so one scalar check suffices
            if not np.isfinite(g.sum()):
                state.faults += 1
                return False
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return True


def soft_update(target: Network, online: Network, tau: float):
    """Polyak blend: target <- (1 - tau) * target + tau * online."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    for tp, op in zip(target.params(), online.params()):
        tp *= 1.0 - tau
        tp += tau * op
