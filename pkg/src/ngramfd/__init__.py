"""n-gram frequency analysis and frequency-descend example generation for word-level textual attacks."""

__version__ = "0.1.0"

from .analysis import AEPair, AnalysisReport, analyze_pairs, classify_pair, export_rank_frequency, substitution_breakdown
from .errors import (
    CompatibilityError,
    ConfigurationError,
    DataError,
    PairRejected,
    UndefinedFrequencyError,
    UsageError,
)
from .fdgen import GenParams, GenResult, augment_dataset, generate_nfd
from .freqtable import (
    FDClass,
    FrequencyTable,
    Substitution,
    build_table,
    classify_delta,
    delta_frequency,
    extract_ngrams,
    load_table,
    lookup,
    save_table,
    text_frequency,
)
from .hullsim import (
    ConvexText,
    FractionalFreqTable,
    HullParams,
    fractional_update,
    hull_delta_1,
    hull_delta_2,
    hull_update,
    init_weights,
    simulate,
)
from .substitutes import SubstituteSet, SubstituteSource, candidates, load_lexicon, nearest_neighbor_source, partition_fd_fa
from .textcore import LabeledExample, Text, detokenize, load_dataset, tokenize, write_dataset
