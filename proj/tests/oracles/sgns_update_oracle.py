#!/usr/bin/env python3
# High-precision hand execution of the one-thread Hogwild SGNS update, used to
# freeze expected values for tests/unit/kernel_test.cpp. Independent of the
# C++ kernels.
from mpmath import mp, mpf, exp, sqrt

mp.dps = 40


def sigmoid(x):
    return 1 / (1 + exp(-x))


def hogwild_update(m_in, m_out, inputs, outputs_per_input, alpha):
    """outputs_per_input[i] is [(row, label), ...] for input word i."""
    dim = len(next(iter(m_in.values())))
    for inp, outs in zip(inputs, outputs_per_input):
        temp = [mpf(0)] * dim
        for row, label in outs:
            inn = sum(m_in[inp][j] * m_out[row][j] for j in range(dim))
            err = label - sigmoid(inn)
            for j in range(dim):
                temp[j] += err * m_out[row][j]
            for j in range(dim):
                m_out[row][j] += alpha * err * m_in[inp][j]
        for j in range(dim):
            m_in[inp][j] += alpha * temp[j]


if __name__ == "__main__":
    m_in = {0: [mpf(1), mpf(0)]}
    m_out = {1: [mpf(1), mpf(0)], 2: [mpf(0), mpf(1)]}
    hogwild_update(m_in, m_out, [0], [[(1, 1), (2, 0)]], mpf("0.1"))
    print("m_in[0] ", [mp.nstr(v, 17) for v in m_in[0]])
    print("m_out[1]", [mp.nstr(v, 17) for v in m_out[1]])
    print("m_out[2]", [mp.nstr(v, 17) for v in m_out[2]])
    print("sigmoid(6)", mp.nstr(sigmoid(6), 17))
    print("keep(f=100t)", mp.nstr((sqrt(100) + 1) * mpf("0.01"), 17))
    w = mpf(8) ** mpf("0.75")
    print("table share a", mp.nstr(w / (w + 1), 17), "slots", mp.nstr(1000 * w / (w + 1), 17))
