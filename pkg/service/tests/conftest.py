"""A miniature randomly initialized fill-mask model shared by the suite.

The vocabulary is a handful of Persian words plus two continuation pieces
so multi-piece candidates exist: "ابرو" splits into two pieces and
"کتابها" into two. "قلب" is deliberately absent, it exercises the
unknown-token path.
"""

import pytest
import torch
import transformers
from transformers import BertConfig, BertForMaskedLM, BertTokenizer

from lm_service.config import ServiceConfig

transformers.utils.logging.set_verbosity_error()
transformers.utils.logging.disable_progress_bar()

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [
    "او", "صد", "کتاب", "خوب", "خواند", "با", "دوست", "به", "شهر", "رفت",
    "سد", "آب", "اب", "##رو", "##ها", "من", "تو", "در", "روز", "سرد",
    "گرم", "نور", "باد", "ماه", "سال",
]
VOCAB = {token: i for i, token in enumerate(SPECIALS + WORDS)}
SINGLE_PIECE_WORDS = [w for w in WORDS if not w.startswith("##")]


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory) -> str:
    directory = tmp_path_factory.mktemp("tinybert")
    tokenizer = BertTokenizer(vocab=dict(VOCAB), do_lower_case=False)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        hidden_dropout_prob=0.0,
        attention_probs_dropout_prob=0.0,
    )
    torch.manual_seed(0)
    model = BertForMaskedLM(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def service_config(model_dir) -> ServiceConfig:
    return ServiceConfig(model=model_dir, max_candidate_pieces=4)
