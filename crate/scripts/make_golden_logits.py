"""Write golden next-token logits for a GPT-2 checkpoint directory.

Usage: python scripts/make_golden_logits.py MODEL_DIR

MODEL_DIR is a Hugging Face style GPT-2 directory. If it holds only
pytorch_model.bin, model.safetensors is written alongside it. The result,
MODEL_DIR/golden_logits.json, is read by the acceptance suite when
NOISYICL_GPT2_DIR points at MODEL_DIR.
"""
import json
import os
import sys

import torch
from transformers import GPT2LMHeadModel, GPT2Tokenizer

PROMPTS = [
    "Label: ",
    "The capital of France is",
    "Input: a great film, Label:",
    "Input: the plot was dull and slow, Label: negative\nInput: a warm, clever comedy, Label:",
    "Hello, my name is",
]


def main(model_dir):
    model = GPT2LMHeadModel.from_pretrained(model_dir, torch_dtype=torch.float32).eval()
    tok = GPT2Tokenizer.from_pretrained(model_dir)
    if not os.path.exists(os.path.join(model_dir, "model.safetensors")):
        model.save_pretrained(model_dir, safe_serialization=True)
    cases = []
    with torch.no_grad():
        for text in PROMPTS:
            ids = tok.encode(text)
            logits = model(torch.tensor([ids])).logits[0]
            cases.append({
                "text": text,
                "tokens": ids,
                "last_logits": [float(x) for x in logits[-1]],
                "all_logits": None,
            })
    out = os.path.join(model_dir, "golden_logits.json")
    with open(out, "w") as f:
        json.dump({"source": "transformers GPT2LMHeadModel, float32", "cases": cases}, f)
    print("wrote", out)


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
