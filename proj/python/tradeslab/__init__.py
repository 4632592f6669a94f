"""TRADES adversarial-training laboratory with gradient-masking instrumentation."""

from ._core import (
    eval_run,
    fosc_closed_form,
    gen_blobs,
    lr_at,
    masking_verdict,
    predict,
    rng_algorithm,
    train_run,
)

__all__ = [
    "eval_run",
    "fosc_closed_form",
    "gen_blobs",
    "lr_at",
    "masking_verdict",
    "predict",
    "rng_algorithm",
    "train_run",
]
