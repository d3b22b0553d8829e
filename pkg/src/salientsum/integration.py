"""Pretrained-model backends (causal LM, encoder, NLI, seq2seq).

Everything here requires the optional ``integration`` extras (torch and
transformers) and downloads weights on first use; nothing in this module
is imported by the core library or the test suite. Install with::

    pip install "salientsum[integration]"
"""

from __future__ import annotations

import math
from typing import Sequence

from .abstraction import GenerationConfig
from .classifier import TrainConfig


def _require_torch():
    try:
        import torch  # noqa: F401
        import transformers  # noqa: F401
    except ImportError as exc:
        raise RuntimeError(
            "this backend needs torch and transformers; "
            'install with: pip install "salientsum[integration]"'
        ) from exc


class CausalLmLikelihoodBackend:
    """Token log-likelihoods from a pretrained causal language model."""

    def __init__(self, model_name: str = "gpt2", device: str | None = None):
        _require_torch()
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.device = device or ("cuda" if torch.cuda.is_available() else "cpu")
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForCausalLM.from_pretrained(model_name)
        self.model.to(self.device).eval()
        self.max_context_tokens = int(self.model.config.max_position_embeddings)
        self.fingerprint = f"causal-lm:{model_name}"

    def count_tokens(self, text: str) -> int:
        return len(self.tokenizer(text)["input_ids"])

    def token_logprobs(self, context: str, target: str) -> list[float]:
        torch = self._torch
        joined = (context + " " + target) if context else target
        full_ids = self.tokenizer(joined)["input_ids"]
        context_len = len(self.tokenizer(context)["input_ids"]) if context else 0
        bos = self.tokenizer.bos_token_id
        ids = [bos] + full_ids if bos is not None else full_ids
        offset = 1 if bos is not None else 0
        tensor = torch.tensor([ids], device=self.device)
        with torch.no_grad():
            logits = self.model(tensor).logits[0]
        logprobs = torch.log_softmax(logits, dim=-1)
        out = []
        for position in range(context_len, len(full_ids)):
            k = position + offset
            if k == 0:
                continue  # nothing to condition the very first token on
            out.append(float(logprobs[k - 1, ids[k]]))
        return out


class EncoderEmbeddingBackend:
    """Sentence embeddings: mean-pooled final hidden states of an encoder."""

    def __init__(self, model_name: str = "bert-base-uncased", device: str | None = None):
        _require_torch()
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self.device = device or ("cuda" if torch.cuda.is_available() else "cpu")
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.to(self.device).eval()
        self.fingerprint = f"encoder-embed:{model_name}"

    def embed(self, text: str) -> Sequence[float]:
        torch = self._torch
        batch = self.tokenizer(text, return_tensors="pt", truncation=True).to(self.device)
        with torch.no_grad():
            hidden = self.model(**batch).last_hidden_state[0]
        return hidden.mean(dim=0).cpu().tolist()


class NliEntailmentBackend:
    """Entailment probability from a pretrained NLI cross-encoder."""

    def __init__(self, model_name: str = "roberta-large-mnli", device: str | None = None):
        _require_torch()
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.device = device or ("cuda" if torch.cuda.is_available() else "cpu")
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_name)
        self.model.to(self.device).eval()
        label2id = {k.lower(): v for k, v in self.model.config.label2id.items()}
        self._entail_index = next(v for k, v in label2id.items() if "entail" in k)
        self.fingerprint = f"nli:{model_name}"

    def entailment_probability(self, premise: str, hypothesis: str) -> float:
        torch = self._torch
        batch = self.tokenizer(premise, hypothesis, return_tensors="pt",
                               truncation=True).to(self.device)
        with torch.no_grad():
            logits = self.model(**batch).logits[0]
        return float(torch.softmax(logits, dim=-1)[self._entail_index])


class Seq2SeqSummarizerBackend:
    """Beam-search abstractive summarizer over a pretrained seq2seq model."""

    def __init__(self, model_name: str = "facebook/bart-large-cnn",
                 device: str | None = None):
        _require_torch()
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.device = device or ("cuda" if torch.cuda.is_available() else "cpu")
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_name)
        self.model.to(self.device).eval()
        self.name = f"seq2seq:{model_name}"

    def count_tokens(self, text: str) -> int:
        return len(self.tokenizer(text)["input_ids"])

    def generate(self, text: str, config: GenerationConfig) -> str:
        torch = self._torch
        batch = self.tokenizer(text, return_tensors="pt", truncation=True,
                               max_length=config.max_input_tokens).to(self.device)
        with torch.no_grad():
            output = self.model.generate(
                **batch,
                num_beams=config.beam_size,
                length_penalty=config.length_penalty,
                min_length=config.min_length_tokens,
                no_repeat_ngram_size=config.no_repeat_ngram,
                max_length=config.min_length_tokens * 2,
            )
        return self.tokenizer.decode(output[0], skip_special_tokens=True)


class _EncoderClassifierModel:
    def __init__(self, backend: "EncoderClassifierBackend"):
        self.backend = backend
        self.dev_accuracy_per_epoch: list[float] = []

    def predict_proba(self, text: str) -> float:
        torch = self.backend._torch
        batch = self.backend.tokenizer(text, return_tensors="pt",
                                       truncation=True).to(self.backend.device)
        self.backend.model.eval()
        with torch.no_grad():
            logits = self.backend.model(**batch).logits[0]
        return float(torch.softmax(logits, dim=-1)[1])


class EncoderClassifierBackend:
    """Fine-tunes a pretrained encoder for binary salience classification.

    Optimizer settings (learning rate, gradient clipping, linear schedule
    with warmup) come from :class:`~salientsum.classifier.TrainConfig`.
    """

    name = "encoder"

    def __init__(self, model_name: str = "bert-base-uncased",
                 device: str | None = None, batch_size: int = 16,
                 num_training_steps: int = 1000, warmup_steps: int = 100):
        _require_torch()
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.device = device or ("cuda" if torch.cuda.is_available() else "cpu")
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSequenceClassification.from_pretrained(
            model_name, num_labels=2)
        self.model.to(self.device)
        self.batch_size = batch_size
        self.num_training_steps = num_training_steps
        self.warmup_steps = warmup_steps

    def fit(self, train: Sequence[tuple[str, int]], config: TrainConfig,
            dev: Sequence[tuple[str, int]] | None = None) -> _EncoderClassifierModel:
        torch = self._torch
        from transformers import get_linear_schedule_with_warmup

        torch.manual_seed(config.seed)
        optimizer = torch.optim.AdamW(self.model.parameters(), lr=config.learning_rate)
        scheduler = get_linear_schedule_with_warmup(
            optimizer, num_warmup_steps=self.warmup_steps,
            num_training_steps=self.num_training_steps)
        handle = _EncoderClassifierModel(self)
        batches = math.ceil(len(train) / self.batch_size)
        self.model.train()
        for _ in range(config.epochs):
            for b in range(batches):
                chunk = train[b * self.batch_size:(b + 1) * self.batch_size]
                texts = [t for t, _ in chunk]
                labels = torch.tensor([y for _, y in chunk], device=self.device)
                batch = self.tokenizer(texts, return_tensors="pt", padding=True,
                                       truncation=True).to(self.device)
                loss = self.model(**batch, labels=labels).loss
                optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(self.model.parameters(),
                                               config.max_grad_norm)
                optimizer.step()
                scheduler.step()
            if dev:
                correct = sum((handle.predict_proba(t) >= 0.5) == bool(y)
                              for t, y in dev)
                handle.dev_accuracy_per_epoch.append(correct / len(dev))
                self.model.train()
        self.model.eval()
        return handle

    def predict_proba(self, model: _EncoderClassifierModel, text: str) -> float:
        return model.predict_proba(text)
