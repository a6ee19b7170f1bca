"""Reference values frozen into tests/unit/oracle_values.hpp.

Each value comes from an implementation independent of the C++ code:
numpy/scipy/scikit-learn/OpenCV/Keras. OpenCV resizes float64 images with
float32 weights, so resize comparisons need a ~1e-6 tolerance. Re-run to regenerate:

    python3 tests/oracles/gen_oracles.py > tests/unit/oracle_values.hpp
"""
import numpy as np
import scipy.fft
import scipy.ndimage
import scipy.special
import cv2
from sklearn.metrics import cohen_kappa_score, roc_auc_score


def arr(name, values):
    flat = ", ".join(repr(float(v)) for v in np.asarray(values, dtype=np.float64).ravel())
    return f"inline constexpr double {name}[] = {{{flat}}};"


def scalar(name, v):
    return f"inline constexpr double {name} = {float(v)!r};"


out = ["#pragma once", "", "// Generated by tests/oracles/gen_oracles.py. Do not edit.", "",
       "namespace oracle {", ""]

# F1 and accuracy from published per-class figures.
f1 = lambda p, r: 2 * p * r / (p + r)
out.append(scalar("kF1Eb", f1(96.57, 91.85)))
out.append(scalar("kF1If", f1(95.77, 98.37)))
table_f1 = [98.35, 99.18, 97.85, 99.46, 94.15, 97.05, 96.24, 93.83, 97.53, 99.46, 100, 99.45, 92.10, 99.46]
out.append(arr("kTableF1", table_f1))
out.append(scalar("kTableF1Mean", np.mean(table_f1)))
out.append(scalar("kAccuracy2510of2576", 2510 / 2576))

# QWK via scikit-learn.
def qwk_from_cm(cm):
    t, p = [], []
    for i in range(cm.shape[0]):
        for j in range(cm.shape[1]):
            t += [i] * int(cm[i, j]); p += [j] * int(cm[i, j])
    return cohen_kappa_score(t, p, weights="quadratic", labels=list(range(cm.shape[0])))

out.append(scalar("kQwk2Class", qwk_from_cm(np.array([[50, 10], [5, 35]]))))
cm3 = np.array([[10, 2, 1], [3, 12, 2], [0, 4, 9]])
out.append(arr("kQwkCm3", cm3))
out.append(scalar("kQwk3Class", qwk_from_cm(cm3)))
cm4 = np.array([[20, 3, 0, 1], [2, 15, 4, 0], [1, 2, 18, 3], [0, 1, 2, 25]])
out.append(arr("kQwkCm4", cm4))
out.append(scalar("kQwk4Class", qwk_from_cm(cm4)))

# AUC with ties via scikit-learn.
auc_scores = [0.5, 0.5, 0.2, 0.8, 0.5, 0.1, 0.8, 0.3]
auc_labels = [1, 0, 0, 1, 1, 0, 0, 1]
out.append(arr("kAucScores", auc_scores))
out.append(arr("kAucLabels", auc_labels))
out.append(scalar("kAucTies", roc_auc_score(auc_labels, auc_scores)))

# KLD against one-hot targets via scipy.special.rel_entr.
rng = np.random.default_rng(7)
pred = rng.dirichlet(np.ones(5), size=6)
labels = np.array([0, 3, 4, 1, 1, 2])
target = np.eye(5)[labels]
out.append(arr("kKldPred", pred))
out.append(arr("kKldLabels", labels))
out.append(scalar("kKld", scipy.special.rel_entr(target, pred).sum(axis=1).mean()))
soft = rng.dirichlet(np.ones(5), size=6)
out.append(arr("kKldSoftTarget", soft))
out.append(scalar("kKldSoft", scipy.special.rel_entr(soft, pred).sum(axis=1).mean()))

# Orthonormal DCT-II via scipy.
m = rng.uniform(-1, 1, size=(4, 5))
out.append(arr("kDctInput4x5", m))
out.append(arr("kDct4x5", scipy.fft.dctn(m, type=2, norm="ortho")))
v = rng.uniform(0, 1, size=7)
out.append(arr("kDctInput7", v))
out.append(arr("kDct7", scipy.fft.dct(v, type=2, norm="ortho")))

# Local std filter: symmetric pad (edge repeated) + population std over the window.
img = rng.uniform(0, 1, size=(5, 6))
out.append(arr("kStdInput5x6", img))
for w in (3, 5):
    k = (w - 1) // 2
    padded = np.pad(img, k, mode="symmetric")
    std = scipy.ndimage.generic_filter(padded, np.std, size=w, mode="constant")[k:-k, k:-k]
    out.append(arr(f"kStd5x6Window{w}", std))
out.append(arr("kSymPad2x3By1", np.pad(np.array([[1., 2., 3.], [4., 5., 6.]]), 1, mode="symmetric")))

# Bilinear resize with half-pixel centres via OpenCV on float64.
src = rng.uniform(0, 1, size=(4, 5))
out.append(arr("kResizeInput4x5", src))
out.append(arr("kResize4x5To7x9", cv2.resize(src, (9, 7), interpolation=cv2.INTER_LINEAR)))
out.append(arr("kResize4x5To2x3", cv2.resize(src, (3, 2), interpolation=cv2.INTER_LINEAR)))

# Layer forward/backward values via PyTorch (float64).
import torch
import torch.nn.functional as F
torch.set_default_dtype(torch.float64)
x = rng.uniform(-1, 1, size=(2, 2, 5, 6))
w = rng.uniform(-1, 1, size=(3, 2, 3, 3))
b = rng.uniform(-1, 1, size=(3,))
out.append(arr("kConvX", x))
out.append(arr("kConvW", w))
out.append(arr("kConvB", b))
tx, tw, tb = (torch.tensor(a, requires_grad=True) for a in (x, w, b))
y = F.conv2d(tx, tw, tb)
out.append(arr("kConvY", y.detach().numpy()))
upstream = rng.uniform(-1, 1, size=tuple(y.shape))
out.append(arr("kConvUpstream", upstream))
(y * torch.tensor(upstream)).sum().backward()
out.append(arr("kConvGradX", tx.grad.numpy()))
out.append(arr("kConvGradW", tw.grad.numpy()))
out.append(arr("kConvGradB", tb.grad.numpy()))

p_in = rng.uniform(-1, 1, size=(1, 2, 7, 8))
out.append(arr("kPoolX", p_in))
out.append(arr("kPoolY", F.max_pool2d(torch.tensor(p_in), 3).numpy()))

bn_in = rng.uniform(-2, 2, size=(4, 3, 2, 2))
gamma = rng.uniform(0.5, 1.5, size=3)
beta = rng.uniform(-0.5, 0.5, size=3)
rm, rv = torch.zeros(3), torch.ones(3)
bn_y = F.batch_norm(torch.tensor(bn_in), rm, rv, torch.tensor(gamma), torch.tensor(beta), training=True,
                    momentum=0.1, eps=1e-5)
out.append(arr("kBnX", bn_in))
out.append(arr("kBnGamma", gamma))
out.append(arr("kBnBeta", beta))
out.append(arr("kBnY", bn_y.numpy()))
# Keras-style momentum 0.9 on the running mean equals torch momentum 0.1.
out.append(arr("kBnRunningMean", rm.numpy()))
out.append(arr("kBnRunningVar", rv.numpy()))

logits = rng.uniform(-3, 3, size=(3, 4))
ce_labels = [2, 0, 3]
tl = torch.tensor(logits, requires_grad=True)
loss = F.cross_entropy(tl, torch.tensor(ce_labels))
loss.backward()
out.append(arr("kCeLogits", logits))
out.append(arr("kCeLabels", ce_labels))
out.append(scalar("kCeLoss", loss.item()))
out.append(arr("kCeGrad", tl.grad.numpy()))

# Trainable parameter counts from an equivalent Keras model.
import keras_model
for mode, n in keras_model.trainable_counts().items():
    out.append(f"inline constexpr unsigned long kParams{mode.capitalize()} = {n};")

out += ["", "}  // namespace oracle", ""]
print("\n".join(out))
