from dataclasses import dataclass


@dataclass(frozen=True)
class BertRunConfig:
    """Fine-tuning settings.

    The defaults follow the standard recipe for this model family: four
    epochs at 2e-5 with 10% linear warmup, batch size 32 for training and
    evaluation, sequences capped at 256 tokens. The encoder may be a hub
    name or a local directory.
    """

    encoder: str = "bert-base-uncased"
    batch_size: int = 32
    epochs: int = 4
    learning_rate: float = 2e-5
    max_length: int = 256
    warmup_fraction: float = 0.1
    seed: int = 42

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_length < 8:
            raise ValueError("max_length must be >= 8")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
