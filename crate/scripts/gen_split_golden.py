"""Independent Python implementation of the canonical SplitMix64 Fisher-Yates
shuffle, used to freeze golden split index lists and seed-derivation values."""
import hashlib
import json
import os

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def below(self, n):
        # Lemire's nearly-divisionless unbiased bounded integer
        m = self.next_u64() * n
        low = m & MASK
        if low < n:
            t = ((1 << 64) - n) % n
            while low < t:
                m = self.next_u64() * n
                low = m & MASK
        return m >> 64


def shuffled(n, seed):
    idx = list(range(n))
    rng = SplitMix64(seed)
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def split(n, seed=42):
    order = shuffled(n, seed)
    test_len = 512 if n > 512 else n // 2
    val_len = min(512, n - test_len)
    return order[:val_len], order[n - test_len:]


def derive_seed(parent, label):
    h = hashlib.sha256(parent.to_bytes(8, "little") + label.encode()).digest()
    return int.from_bytes(h[:8], "little")


ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")
golden = {}
for n in (800, 1024, 2000):
    val, test = split(n)
    golden[str(n)] = {"validation": val, "test": test}
rng = SplitMix64(42)
golden["splitmix64_seed42_first5"] = [str(rng.next_u64()) for _ in range(5)]
golden["derive_seed"] = [
    {"parent": str(p), "label": l, "seed": str(derive_seed(p, l))}
    for p, l in [(42, "wte"), (42, "wpe"), (43, "wte"), (0, ""), (42, "h.0.attn.c_attn.weight")]
]
with open(os.path.join(ROOT, "split_golden.json"), "w") as f:
    json.dump(golden, f)
print("ok", {k: (len(v["validation"]), len(v["test"])) for k, v in golden.items() if k.isdigit()})
