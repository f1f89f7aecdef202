#pragma once

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "socgcf/dataset.hpp"
#include "socgcf/evaluator.hpp"
#include "socgcf/graph.hpp"
#include "socgcf/model.hpp"
#include "socgcf/rng.hpp"

namespace socgcf {

struct TrainConfig {
  double lr = 1e-3;
  double l2_lambda = 1e-4;
  Index batch_size = 2048;
  Index max_epochs = 1500;
  Index eval_every = 10;   // epochs between evaluations
  Index patience = 5;      // evaluations without recall improvement before stopping
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
  Index eval_k = 20;
};

void validate_train_config(const TrainConfig& cfg);

struct BPRTriple {
  Index u;
  Index i_pos;  // (u, i_pos) in train
  Index j_neg;  // (u, j_neg) not in train
};

struct TrainHistory {
  struct Eval {
    Index epoch;
    double loss;  // mean per-triple BPR loss over the epoch
    double recall;
    double precision;
    double ndcg;
  };
  std::vector<Eval> evals;
  Index epochs_to_best = 0;
};

// CSV with header `epoch,loss,recall20,precision20,ndcg20`.
void write_history_csv(const TrainHistory& history, std::ostream& out);

struct AdamState {
  DenseMatrix m_users, v_users;
  DenseMatrix m_items, v_items;
  std::int64_t step = 0;
};

AdamState init_adam(Index n_users, Index n_items, Index d);

// One positive/negative triple per training interaction, order shuffled,
// negatives drawn uniformly from items the user never trained on (rejection
// sampling). Users interacting with every item contribute nothing; one
// warning summarizes how many triples that dropped.
std::vector<BPRTriple> sample_epoch(const std::vector<std::pair<Index, Index>>& train,
                                    Index n_items, Rng& rng);

// Sum of -ln sigmoid(y_pos - y_neg) over the batch plus l2_lambda *
// params_norm_sq. Evaluated via softplus so large negative gaps do not
// overflow.
double bpr_loss(const std::vector<std::pair<double, double>>& score_pairs, double params_norm_sq,
                double l2_lambda);

// Loss and its exact gradient w.r.t. the initial embeddings. The forward
// pass is linear, so the gradient of the layer mean is the adjoint operator
// applied in a Horner-style accumulation; the L2 term covers each distinct
// embedding row the batch touches, once.
struct BatchGradient {
  double loss = 0.0;          // total batch loss (BPR sum + L2 term)
  std::size_t n_triples = 0;  // batch size, for mean-loss reporting
  DenseMatrix users;          // d loss / d e_users^(0)
  DenseMatrix items;          // d loss / d e_items^(0)
};
BatchGradient batch_loss_and_gradient(const EmbeddingState& state0, const GraphInputs& g,
                                      const ModelConfig& mcfg, double l2_lambda,
                                      const std::vector<BPRTriple>& batch);

// Adam step over rows with a nonzero gradient; rows the batch cannot have
// influenced stay bit-identical. Throws on non-finite gradients.
void grad_step(EmbeddingState& state0, AdamState& adam, const BatchGradient& grad,
               const TrainConfig& cfg);

// Max relative error between the analytic batch gradient and central finite
// differences over every coordinate of a freshly initialized state.
double finite_diff_check(const GraphInputs& g, const ModelConfig& mcfg,
                         const std::vector<BPRTriple>& batch, double l2_lambda, double epsilon);

// Full loop: sampled mini-batches, periodic evaluation at eval_k, early
// stopping on stagnant recall, best-recall snapshot returned.
std::pair<EmbeddingState, TrainHistory> train(const Dataset& d, const GraphInputs& g,
                                              const ModelConfig& mcfg, const TrainConfig& tcfg);

}  // namespace socgcf
