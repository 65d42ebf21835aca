"""Build the tiny randomly-initialised GPT-2 fixture and its reference logits.

Uses the Hugging Face `transformers` GPT-2 implementation as the reference.
Outputs (under crates/core/tests/fixtures/tiny_gpt2/):
  model.safetensors, config.json, reference_logits.json
"""
import json
import os

import torch
from transformers import GPT2Config, GPT2LMHeadModel

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures", "tiny_gpt2")

torch.manual_seed(1234)
cfg = GPT2Config(
    vocab_size=512,
    n_positions=64,
    n_embd=32,
    n_layer=2,
    n_head=4,
    layer_norm_epsilon=1e-5,
    initializer_range=0.2,
    activation_function="gelu_new",
)
model = GPT2LMHeadModel(cfg).eval()
with torch.no_grad():
    for name, p in model.named_parameters():
        if "ln" in name:
            # non-trivial layernorm parameters so the affine part is exercised
            p.copy_(torch.randn_like(p) * 0.3 + (1.0 if name.endswith("weight") else 0.0))
        elif name.endswith("bias"):
            p.copy_(torch.randn_like(p) * 0.1)

os.makedirs(OUT, exist_ok=True)
model.save_pretrained(OUT, safe_serialization=True)
for extra in ("generation_config.json",):
    path = os.path.join(OUT, extra)
    if os.path.exists(path):
        os.remove(path)

g = torch.Generator().manual_seed(99)
prompts = [[int(t) for t in torch.randint(0, 512, (n,), generator=g)] for n in (1, 3, 7, 16, 40)]
cases = []
with torch.no_grad():
    for ids in prompts:
        logits = model(torch.tensor([ids])).logits[0]
        cases.append({
            "tokens": ids,
            "last_logits": [float(x) for x in logits[-1]],
            "all_logits": [[float(x) for x in row] for row in logits] if len(ids) <= 16 else None,
        })
with open(os.path.join(OUT, "reference_logits.json"), "w") as f:
    json.dump({"source": "transformers GPT2LMHeadModel, float32", "cases": cases}, f)
print("wrote", OUT)
