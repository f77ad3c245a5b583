"""Profile (UP), network (UN), activity (UA) and content (UC) feature sets."""

from .extract import (
    assemble_vector,
    content_similarity,
    extract_activity,
    extract_content,
    extract_network,
    extract_profile,
    extract_stream,
    feature_values,
    similarity_pairs,
    tag_tokens,
)
from .lexicon import LexiconError, LexiconResources, bundled_lexicons, load_lexicons
from .records import RecordError, Tweet, UserRecord, read_users, user_from_json, write_users
from .registry import ABLATION_COMBOS, SET_ORDER, FeatureRegistry, UnknownCombo, parse_combo
