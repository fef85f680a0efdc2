"""Minimal reverse-mode autodiff over dense float64 arrays (rank <= 2).

Just enough machinery for a noise-injected MLP generator, batch
normalization, dropout, and the censored losses: nodes carry a value and a
gradient accumulator, every op registers a backward closure, and
``backward`` runs the tape in reverse topological order.

Subgradient conventions are fixed for determinism: relu'(0) = 0 and
abs'(0) = 0.
"""

import numpy as np

from .errors import ShapeError

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def _stable_sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Node:
    """One value in the computation graph, with its gradient accumulator."""

    __slots__ = ("value", "grad", "_parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        self.value = np.asarray(value, dtype=np.float64)
        if self.value.ndim > 2:
            raise ShapeError(f"rank {self.value.ndim} array; only rank <= 2 supported")
        self.grad = np.zeros_like(self.value)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    # -- elementwise arithmetic (numpy broadcasting, summed back on backward)

    def __add__(self, other):
        other = as_node(other)
        out = Node(self.value + other.value, (self, other))

        def bwd():
            self.grad += _unbroadcast(out.grad, self.value.shape)
            other.grad += _unbroadcast(out.grad, other.value.shape)

        out._backward = bwd
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Node(-self.value, (self,))

        def bwd():
            self.grad -= out.grad

        out._backward = bwd
        return out

    def __sub__(self, other):
        return self + (-as_node(other))

    def __rsub__(self, other):
        return as_node(other) + (-self)

    def __mul__(self, other):
        other = as_node(other)
        out = Node(self.value * other.value, (self, other))

        def bwd():
            self.grad += _unbroadcast(out.grad * other.value, self.value.shape)
            other.grad += _unbroadcast(out.grad * self.value, other.value.shape)

        out._backward = bwd
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_node(other)
        out = Node(self.value / other.value, (self, other))

        def bwd():
            self.grad += _unbroadcast(out.grad / other.value, self.value.shape)
            other.grad += _unbroadcast(
                -out.grad * self.value / other.value**2, other.value.shape
            )

        out._backward = bwd
        return out

    def __rtruediv__(self, other):
        return as_node(other) / self

    def __matmul__(self, other):
        other = as_node(other)
        if self.value.ndim != 2 or other.value.ndim != 2:
            raise ShapeError(
                f"matmul expects two matrices, got {self.value.shape} @ {other.value.shape}"
            )
        if self.value.shape[1] != other.value.shape[0]:
            raise ShapeError(
                f"matmul inner dims differ: {self.value.shape} @ {other.value.shape}"
            )
        out = Node(self.value @ other.value, (self, other))

        def bwd():
            self.grad += out.grad @ other.value.T
            other.grad += self.value.T @ out.grad

        out._backward = bwd
        return out

    # -- nonlinearities

    def relu(self):
        out = Node(np.maximum(self.value, 0.0), (self,))

        def bwd():
            self.grad += out.grad * (self.value > 0)

        out._backward = bwd
        return out

    max0 = relu  # elementwise max(0, .), same op under its loss-term name

    def sigmoid(self):
        sig = _stable_sigmoid(self.value)
        out = Node(sig, (self,))

        def bwd():
            self.grad += out.grad * sig * (1.0 - sig)

        out._backward = bwd
        return out

    def softplus(self):
        out = Node(np.logaddexp(0.0, self.value), (self,))

        def bwd():
            self.grad += out.grad * _stable_sigmoid(self.value)

        out._backward = bwd
        return out

    def abs(self):
        out = Node(np.abs(self.value), (self,))

        def bwd():
            self.grad += out.grad * np.sign(self.value)

        out._backward = bwd
        return out

    def exp(self):
        ex = np.exp(self.value)
        out = Node(ex, (self,))

        def bwd():
            self.grad += out.grad * ex

        out._backward = bwd
        return out

    def log(self):
        out = Node(np.log(self.value), (self,))

        def bwd():
            self.grad += out.grad / self.value

        out._backward = bwd
        return out

    def sqrt(self):
        rt = np.sqrt(self.value)
        out = Node(rt, (self,))

        def bwd():
            self.grad += out.grad * 0.5 / rt

        out._backward = bwd
        return out

    # -- reductions and shape ops

    def sum(self, axis=None):
        out = Node(self.value.sum(axis=axis, keepdims=axis is not None), (self,))

        def bwd():
            self.grad += np.broadcast_to(out.grad, self.value.shape)

        out._backward = bwd
        return out

    def mean(self, axis=None):
        count = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis) * (1.0 / count)

    def reshape(self, *shape):
        out = Node(self.value.reshape(*shape), (self,))

        def bwd():
            self.grad += out.grad.reshape(self.value.shape)

        out._backward = bwd
        return out


def as_node(x):
    return x if isinstance(x, Node) else Node(x)


def concat(nodes, axis=1):
    """Concatenate nodes along ``axis``; backward splits the gradient."""
    nodes = [as_node(n) for n in nodes]
    out = Node(np.concatenate([n.value for n in nodes], axis=axis), tuple(nodes))
    sizes = [n.value.shape[axis] for n in nodes]
    offsets = np.cumsum([0] + sizes)

    def bwd():
        for node, a, b in zip(nodes, offsets[:-1], offsets[1:]):
            if axis == 0:
                node.grad += out.grad[a:b]
            else:
                node.grad += out.grad[:, a:b]

    out._backward = bwd
    return out


def dropout(x, p, rng, train):
    """Inverted dropout: train-mode keeps units with prob 1-p scaled by
    1/(1-p); inference is the identity."""
    if not train or p == 0.0:
        return x
    mask = (rng.random(x.value.shape) >= p) / (1.0 - p)
    return x * Node(mask)


def batchnorm(x, gamma, beta, running_mean, running_var, train,
              eps=BN_EPS, momentum=BN_MOMENTUM):
    """Column-wise batch normalization with affine scale/shift.

    Train mode normalizes by batch statistics (population variance) and
    updates ``running_mean``/``running_var`` in place; inference applies the
    frozen running statistics as a deterministic affine map.
    """
    if train:
        mu = x.mean(axis=0)
        centered = x - mu
        var = (centered * centered).mean(axis=0)
        xhat = centered / (var + eps).sqrt()
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mu.value[0]
        running_var *= momentum
        running_var += (1.0 - momentum) * var.value[0]
    else:
        xhat = (x - Node(running_mean)) * Node(1.0 / np.sqrt(running_var + eps))
    return xhat * gamma + beta


def topo_order(root):
    """The tape: every node after all of its parents."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            stack.append((parent, False))
    return order


def backward(root):
    """Accumulate d(root)/d(node) into ``grad`` of every reachable node."""
    if root.value.size != 1:
        raise ShapeError(f"backward root must be scalar, got shape {root.value.shape}")
    order = topo_order(root)
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node._backward is not None:
            node._backward()


def grad_check(f, params, h=1e-5):
    """Max relative gap between autodiff and central-difference gradients.

    ``f`` maps a list of parameter Nodes to a scalar Node and must be
    deterministic; callers keep the evaluation point away from kinks.
    Returns ``max_j |g_ad - g_fd| / max(1, |g_fd|)``.
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]
    nodes = [Node(p.copy()) for p in params]
    backward(f(*nodes))

    def value_at(arrays):
        return float(f(*[Node(a) for a in arrays]).value)

    worst = 0.0
    for k, base in enumerate(params):
        flat = base.reshape(-1)
        for j in range(flat.size):
            bumped = [p.copy() for p in params]
            bumped[k].reshape(-1)[j] = flat[j] + h
            f_plus = value_at(bumped)
            bumped[k].reshape(-1)[j] = flat[j] - h
            f_minus = value_at(bumped)
            g_fd = (f_plus - f_minus) / (2.0 * h)
            g_ad = nodes[k].grad.reshape(-1)[j]
            worst = max(worst, abs(g_ad - g_fd) / max(1.0, abs(g_fd)))
    return worst
