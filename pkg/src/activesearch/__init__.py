"""Cluster-bandit active search for high-recall document review."""

from .backend import BACKEND
from .bandit import (ArmPosterior, BanditState, RewardBatch, init_posteriors,
                     replay_reconstruct, sample_optimistic, update_posteriors)
from .classifier import (LogRegModel, TrainingSet, assemble_training_set,
                         predict, train)
from .cluster import MembershipMatrix, import_memberships, soft_cluster
from .corpus import (CorpusMatrix, Document, Vocabulary, build_vocabulary,
                     load_corpus, synthetic_positive, tokenize, vectorize)
from .evaluation import (EvaluationReport, RecallCurve, RunResult, UNREACHED,
                         aggregate_runs, build_report, effort_to_recall,
                         recall_curve, weighted_recall)
from .search import (ActiveSearchSession, DatasetOracle, SearchConfig,
                     Trajectory, next_batch_size, run_search, select_instance)
from .synthetic import generate_synthetic

__version__ = "0.1.0"
