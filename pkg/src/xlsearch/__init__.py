"""Cross-language code-to-code search.

Dual projection encoders are trained contrastively over frozen base
embeddings; retrieval is an exact flat scan under an absolute-cosine
similarity.  Training targets can be softened with behavioral similarity
scores obtained by running code pairs on shared random inputs.
"""

__version__ = "0.1.0"

from .corpus import CodeSample, DatasetSplit, TrainingTuple, load_dataset, make_tuples, split_by_problem
from .embedding import EmbeddingTable, FeaturizerProvider, TableProvider, featurize, get_embedding, read_table, write_table
from .errors import ConfigError, DimensionError, FormatError, MissingEmbeddingError, TrainingError, XLSearchError
from .trainer import EncoderParams, SSSTable, TrainConfig, cosine_sim, load_encoder, save_encoder, target_label, train, tuple_loss
from .search import SearchHit, SearchIndex, build_index, load_index, query, save_index
from .evaluation import EvalReport, RankedQueryResult, avg_first_position, avg_rank_gap, evaluate, precision_at_n
from .sss import RunnerConfig, SSSConfig, build_sss_table, generate_inputs, run_sample, semantic_similarity

__all__ = [name for name in dir() if not name.startswith("_")]
