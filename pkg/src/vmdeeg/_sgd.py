"""Compiled per-sample backpropagation epoch over a flat parameter vector.

Layer ``l`` stores its (n_out, n_in) weight matrix row-major at
``w_off[l]`` and its bias at ``b_off[l]``.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def sgd_epoch(params, sizes, w_off, b_off, a_off, inputs, targets, order, rate, acts, deltas):
    n_layers = sizes.size - 1
    total = 0.0
    for idx in order:
        for j in range(sizes[0]):
            acts[j] = inputs[idx, j]
        for l in range(n_layers):
            n_in = sizes[l]
            n_out = sizes[l + 1]
            src = a_off[l]
            dst = a_off[l + 1]
            for o in range(n_out):
                z = params[b_off[l] + o]
                row = w_off[l] + o * n_in
                for i in range(n_in):
                    z += params[row + i] * acts[src + i]
                acts[dst + o] = 1.0 / (1.0 + np.exp(-z))
        out = a_off[n_layers]
        loss = 0.0
        for o in range(sizes[n_layers]):
            y = acts[out + o]
            err = y - targets[idx, o]
            loss += err * err
            deltas[out + o] = err * y * (1.0 - y)
        total += 0.5 * loss
        for l in range(n_layers - 1, -1, -1):
            n_in = sizes[l]
            n_out = sizes[l + 1]
            src = a_off[l]
            dst = a_off[l + 1]
            if l > 0:
                for i in range(n_in):
                    s = 0.0
                    for o in range(n_out):
                        s += params[w_off[l] + o * n_in + i] * deltas[dst + o]
                    a = acts[src + i]
                    deltas[src + i] = s * a * (1.0 - a)
            for o in range(n_out):
                d = deltas[dst + o]
                row = w_off[l] + o * n_in
                for i in range(n_in):
                    params[row + i] -= rate * d * acts[src + i]
                params[b_off[l] + o] -= rate * d
    return total
