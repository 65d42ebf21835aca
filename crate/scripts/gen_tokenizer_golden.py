"""Golden GPT-2 token ids for a fixed corpus, produced by the reference
`transformers` GPT2Tokenizer reading the bundled vocab/merges files."""
import json
import os

from transformers import GPT2Tokenizer

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core")
tok = GPT2Tokenizer(
    os.path.join(ROOT, "assets", "gpt2", "vocab.json"),
    os.path.join(ROOT, "assets", "gpt2", "merges.txt"),
)

CORPUS = [
    "Hello world",
    " Label:",
    "Label:",
    "Label: ",
    " ",
    "Input: good movie, Label: positive\nInput: bad film, Label: ",
    "Input: , Label: ",
    "Input: the food was great, Aspect: food, Label: positive",
    "Input: A man is playing, Text 2: Nobody plays, Label: contradiction",
    "I can't believe it's not butter!",
    "They'll say we'd done it, you're sure?",
    "DON'T SHOUT'S",
    "The year 2023 had 365 days and 12345678 seconds.",
    "   leading spaces",
    "trailing spaces   ",
    "multiple   inner    spaces",
    "tabs\tand\nnewlines\n\nhere",
    "line\r\nbreaks\r\n",
    "emoji 😀🎉 and more 🚀",
    "café naïve résumé",
    "日本語のテキスト",
    "Привет, мир!",
    "مرحبا بالعالم",
    "mixed123numbers456",
    "symbols !@#$%^&*()_+-=[]{}|;':\",./<>?",
    "a",
    "ab",
    "supercalifragilisticexpialidocious",
    "hate_speech18 and financial_phrasebank",
    "negative",
    " negative",
    " positive",
    " neutral",
    " entailment",
    " not_entailment",
    "https://example.com/path?query=1&x=y",
    "email@example.org",
    "C++ and Rust's borrow checker",
    "  \n  \t ",
    "...",
    "—em dash– and en dash",
    "It was the best of times, it was the worst of times.",
    "0.5 0.25 1e-3 -42",
    "ALLCAPS lowercase MiXeD",
    "'quoted' \"double\"",
    "new\nline",
    "x nbsp",
    "the movie was utterly boring , and the acting was worse .",
    "A" * 40,
    "ẞ ß Ω ω ∑ ∫",
]
assert len(CORPUS) == 50
out = [{"text": s, "ids": tok.encode(s)} for s in CORPUS]
with open(os.path.join(ROOT, "tests", "fixtures", "tokenizer_golden.json"), "w") as f:
    json.dump(out, f, ensure_ascii=False, indent=0)
print("wrote", len(out))
