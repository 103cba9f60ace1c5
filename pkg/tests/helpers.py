"""Density-matrix oracles used only by the tests."""
import numpy as np

# filled by test_acceptance, echoed by conftest in the terminal summary
ACCEPTANCE_LINES = []

PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1]) / np.sqrt(2)
PSI_PLUS = np.array([0, 1, 1, 0]) / np.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0]) / np.sqrt(2)
BELL = (PHI_PLUS, PSI_PLUS, PHI_MINUS, PSI_MINUS)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


def werner_dm(f):
    e = (1 - f) / 3
    return sum(p * np.outer(b, b) for p, b in zip((f, e, e, e), BELL))


def bell_populations(rho):
    return tuple(float(np.real(b @ rho @ b)) for b in BELL)


def cnot(n, c, t):
    dim = 2**n
    u = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        u[j, i] = 1
    return u


def bbpssw_dm(f):
    """Two Werner pairs (A0 B0)(A1 B1) as qubits 0,1,2,3; bilateral CNOT 0->2, 1->3;
    measure 2 and 3 in Z and keep coincidences."""
    rho = np.kron(werner_dm(f), werner_dm(f))
    u = cnot(4, 1, 3) @ cnot(4, 0, 2)
    rho = u @ rho @ u.T
    r = rho.reshape([2] * 8)
    kept = sum(r[:, :, m, m, :, :, m, m] for m in (0, 1)).reshape(4, 4)
    p_pass = float(np.real(np.trace(kept)))
    return float(np.real(PHI_PLUS @ kept @ PHI_PLUS)) / p_pass, p_pass


def depolarize_qubit1(rho, p):
    ops = [np.kron(I2, P) for P in (X, Y, Z)]
    return (1 - p) * rho + p / 3 * sum(o @ rho @ o.conj().T for o in ops)


def dephase_both(rho, q):
    out = rho
    for P in (np.kron(Z, I2), np.kron(I2, Z)):
        out = (1 - q) * out + q * P @ out @ P
    return out
