"""Independent BLEU oracle used to freeze the fixture values in metrics_test.

Requires sacrebleu (pip install sacrebleu). Inputs are pre-tokenized, so
tokenize='none'. 'floor' smoothing with 0.1 matches the epsilon flag.
"""
import sacrebleu

CASES = {
    "cat_none": (["the cat sat on the mat"], ["the cat is on the mat"], "none"),
    "cat_floor": (["the cat sat on the mat"], ["the cat is on the mat"], "floor"),
    "two_pairs": (["the cat sat on the mat today", "a b c d e"],
                  ["the cat is on the mat", "a b c d e f g"], "none"),
}

for name, (hyp, ref, smooth) in CASES.items():
    b = sacrebleu.corpus_bleu(hyp, [ref], tokenize="none", smooth_method=smooth, smooth_value=0.1)
    print(f"{name}: bleu={b.score!r} precisions={b.precisions} bp={b.bp!r}")
