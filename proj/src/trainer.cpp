#include "socgcf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace socgcf {

namespace {

// -ln sigmoid(x) = softplus(-x), evaluated without overflow.
double neg_log_sigmoid(double x) {
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double dot_row(const DenseMatrix& a, Index ra, const DenseMatrix& b, Index rb) {
  const double* pa = a.row(ra);
  const double* pb = b.row(rb);
  double acc = 0.0;
  for (Index k = 0; k < a.n_cols; ++k) acc += pa[k] * pb[k];
  return acc;
}

std::vector<Index> unique_sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double rows_norm_sq(const DenseMatrix& mat, const std::vector<Index>& rows) {
  double acc = 0.0;
  for (Index r : rows) {
    const double* p = mat.row(r);
    for (Index k = 0; k < mat.n_cols; ++k) acc += p[k] * p[k];
  }
  return acc;
}

struct TouchedRows {
  std::vector<Index> users;
  std::vector<Index> items;
};

TouchedRows touched_rows(const std::vector<BPRTriple>& batch) {
  TouchedRows t;
  t.users.reserve(batch.size());
  t.items.reserve(2 * batch.size());
  for (const BPRTriple& b : batch) {
    t.users.push_back(b.u);
    t.items.push_back(b.i_pos);
    t.items.push_back(b.j_neg);
  }
  t.users = unique_sorted(std::move(t.users));
  t.items = unique_sorted(std::move(t.items));
  return t;
}

double batch_loss_only(const EmbeddingState& state0, const GraphInputs& g, const ModelConfig& mcfg,
                       double l2_lambda, const std::vector<BPRTriple>& batch) {
  const EmbeddingState final_state = forward_final(state0, g, mcfg);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(batch.size());
  for (const BPRTriple& b : batch) {
    pairs.emplace_back(dot_row(final_state.users, b.u, final_state.items, b.i_pos),
                       dot_row(final_state.users, b.u, final_state.items, b.j_neg));
  }
  const TouchedRows t = touched_rows(batch);
  const double norm_sq = rows_norm_sq(state0.users, t.users) + rows_norm_sq(state0.items, t.items);
  return bpr_loss(pairs, norm_sq, l2_lambda);
}

void lazy_adam_rows(DenseMatrix& param, DenseMatrix& m, DenseMatrix& v, const DenseMatrix& grad,
                    const TrainConfig& cfg, double bc1, double bc2) {
  for (Index r = 0; r < param.n_rows; ++r) {
    const double* gr = grad.row(r);
    bool any = false;
    for (Index k = 0; k < param.n_cols; ++k) {
      if (gr[k] != 0.0) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    double* pr = param.row(r);
    double* mr = m.row(r);
    double* vr = v.row(r);
    for (Index k = 0; k < param.n_cols; ++k) {
      mr[k] = cfg.adam_beta1 * mr[k] + (1.0 - cfg.adam_beta1) * gr[k];
      vr[k] = cfg.adam_beta2 * vr[k] + (1.0 - cfg.adam_beta2) * gr[k] * gr[k];
      const double m_hat = mr[k] / bc1;
      const double v_hat = vr[k] / bc2;
      pr[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (cfg.l2_lambda < 0.0) throw std::invalid_argument("l2_lambda must be non-negative");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (cfg.max_epochs < 0) throw std::invalid_argument("max_epochs must be >= 0");
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (cfg.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
      !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) {
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  }
  if (!(cfg.adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
  if (cfg.eval_k < 1) throw std::invalid_argument("eval_k must be >= 1");
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "epoch,loss,recall20,precision20,ndcg20\n";
  for (const TrainHistory::Eval& e : history.evals) {
    out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.recall) << ','
        << format_double(e.precision) << ',' << format_double(e.ndcg) << '\n';
  }
}

AdamState init_adam(Index n_users, Index n_items, Index d) {
  AdamState s;
  s.m_users = DenseMatrix(n_users, d);
  s.v_users = DenseMatrix(n_users, d);
  s.m_items = DenseMatrix(n_items, d);
  s.v_items = DenseMatrix(n_items, d);
  return s;
}

std::vector<BPRTriple> sample_epoch(const std::vector<std::pair<Index, Index>>& train,
                                    Index n_items, Rng& rng) {
  std::unordered_map<Index, std::vector<Index>> user_items;
  for (const auto& [u, i] : train) user_items[u].push_back(i);
  for (auto& [u, items] : user_items) std::sort(items.begin(), items.end());

  std::vector<std::pair<Index, Index>> order = train;
  rng.shuffle(order);

  std::vector<BPRTriple> triples;
  triples.reserve(order.size());
  std::size_t skipped = 0;
  for (const auto& [u, i] : order) {
    const std::vector<Index>& items = user_items[u];
    if (static_cast<Index>(items.size()) >= n_items) {
      ++skipped;
      continue;
    }
    Index j;
    do {
      j = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n_items)));
    } while (std::binary_search(items.begin(), items.end(), j));
    triples.push_back({u, i, j});
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped
              << " triples for users interacting with every item\n";
  }
  return triples;
}

double bpr_loss(const std::vector<std::pair<double, double>>& score_pairs, double params_norm_sq,
                double l2_lambda) {
  double loss = 0.0;
  for (const auto& [y_pos, y_neg] : score_pairs) loss += neg_log_sigmoid(y_pos - y_neg);
  return loss + l2_lambda * params_norm_sq;
}

BatchGradient batch_loss_and_gradient(const EmbeddingState& state0, const GraphInputs& g,
                                      const ModelConfig& mcfg, double l2_lambda,
                                      const std::vector<BPRTriple>& batch) {
  BatchGradient out;
  out.n_triples = batch.size();
  out.users = DenseMatrix(state0.users.n_rows, state0.users.n_cols);
  out.items = DenseMatrix(state0.items.n_rows, state0.items.n_cols);
  if (batch.empty() && l2_lambda == 0.0) return out;

  const EmbeddingState final_state = forward_final(state0, g, mcfg);
  const Index d = state0.users.n_cols;

  // dL/d(final embeddings), accumulated triple by triple.
  EmbeddingState grad_final;
  grad_final.users = DenseMatrix(state0.users.n_rows, d);
  grad_final.items = DenseMatrix(state0.items.n_rows, d);
  for (const BPRTriple& b : batch) {
    const double y_pos = dot_row(final_state.users, b.u, final_state.items, b.i_pos);
    const double y_neg = dot_row(final_state.users, b.u, final_state.items, b.j_neg);
    const double x = y_pos - y_neg;
    out.loss += neg_log_sigmoid(x);
    const double c = -1.0 / (1.0 + std::exp(x));  // d(-ln sigmoid(x))/dx
    double* gu = grad_final.users.row(b.u);
    double* gi = grad_final.items.row(b.i_pos);
    double* gj = grad_final.items.row(b.j_neg);
    const double* eu = final_state.users.row(b.u);
    const double* ei = final_state.items.row(b.i_pos);
    const double* ej = final_state.items.row(b.j_neg);
    for (Index k = 0; k < d; ++k) {
      gu[k] += c * (ei[k] - ej[k]);
      gi[k] += c * eu[k];
      gj[k] -= c * eu[k];
    }
  }

  // final = (1/(K+1)) * sum_k P^k state0, so
  // dL/dstate0 = (1/(K+1)) * sum_k (P^T)^k grad_final.
  EmbeddingState acc = grad_final;
  add_scaled(out.users, acc.users, 1.0);
  add_scaled(out.items, acc.items, 1.0);
  for (Index k = 0; k < mcfg.n_layers; ++k) {
    acc = propagate_adjoint(acc, g, mcfg);
    add_scaled(out.users, acc.users, 1.0);
    add_scaled(out.items, acc.items, 1.0);
  }
  const double inv = 1.0 / static_cast<double>(mcfg.n_layers + 1);
  scale(out.users, inv);
  scale(out.items, inv);

  // L2 over the distinct rows this batch touches.
  const TouchedRows t = touched_rows(batch);
  out.loss +=
      l2_lambda * (rows_norm_sq(state0.users, t.users) + rows_norm_sq(state0.items, t.items));
  for (Index r : t.users) {
    const double* p = state0.users.row(r);
    double* gp = out.users.row(r);
    for (Index k = 0; k < d; ++k) gp[k] += 2.0 * l2_lambda * p[k];
  }
  for (Index r : t.items) {
    const double* p = state0.items.row(r);
    double* gp = out.items.row(r);
    for (Index k = 0; k < d; ++k) gp[k] += 2.0 * l2_lambda * p[k];
  }
  return out;
}

void grad_step(EmbeddingState& state0, AdamState& adam, const BatchGradient& grad,
               const TrainConfig& cfg) {
  if (!all_finite(grad.users) || !all_finite(grad.items)) {
    throw std::runtime_error("non-finite gradient encountered; aborting run");
  }
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
  lazy_adam_rows(state0.users, adam.m_users, adam.v_users, grad.users, cfg, bc1, bc2);
  lazy_adam_rows(state0.items, adam.m_items, adam.v_items, grad.items, cfg, bc1, bc2);
}

double finite_diff_check(const GraphInputs& g, const ModelConfig& mcfg,
                         const std::vector<BPRTriple>& batch, double l2_lambda, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_check: epsilon must be positive");
  EmbeddingState state0 = init_embeddings(g.n_users, g.n_items, mcfg);
  const BatchGradient analytic = batch_loss_and_gradient(state0, g, mcfg, l2_lambda, batch);

  double max_rel = 0.0;
  const auto probe = [&](DenseMatrix& param, const DenseMatrix& grad) {
    for (std::size_t idx = 0; idx < param.values.size(); ++idx) {
      const double orig = param.values[idx];
      param.values[idx] = orig + epsilon;
      const double f_plus = batch_loss_only(state0, g, mcfg, l2_lambda, batch);
      param.values[idx] = orig - epsilon;
      const double f_minus = batch_loss_only(state0, g, mcfg, l2_lambda, batch);
      param.values[idx] = orig;
      const double fd = (f_plus - f_minus) / (2.0 * epsilon);
      const double a = grad.values[idx];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-4});
      max_rel = std::max(max_rel, std::abs(a - fd) / denom);
    }
  };
  probe(state0.users, analytic.users);
  probe(state0.items, analytic.items);
  return max_rel;
}

std::pair<EmbeddingState, TrainHistory> train(const Dataset& d, const GraphInputs& g,
                                              const ModelConfig& mcfg, const TrainConfig& tcfg) {
  validate_model_config(mcfg);
  validate_train_config(tcfg);

  EmbeddingState state0 = init_embeddings(d.n_users, d.n_items, mcfg);
  AdamState adam = init_adam(d.n_users, d.n_items, mcfg.embed_dim);
  Rng sampler(derive_seed(tcfg.seed, "sampling"));

  TrainHistory history;
  EmbeddingState best = state0;
  double best_recall = -std::numeric_limits<double>::infinity();
  Index evals_since_best = 0;

  for (Index epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    const std::vector<BPRTriple> triples = sample_epoch(d.train, d.n_items, sampler);
    double loss_sum = 0.0;
    std::size_t n_triples = 0;
    for (std::size_t begin = 0; begin < triples.size();
         begin += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end =
          std::min(triples.size(), begin + static_cast<std::size_t>(tcfg.batch_size));
      const std::vector<BPRTriple> batch(triples.begin() + static_cast<std::ptrdiff_t>(begin),
                                         triples.begin() + static_cast<std::ptrdiff_t>(end));
      const BatchGradient grad = batch_loss_and_gradient(state0, g, mcfg, tcfg.l2_lambda, batch);
      grad_step(state0, adam, grad, tcfg);
      loss_sum += grad.loss;
      n_triples += grad.n_triples;
    }

    if (epoch % tcfg.eval_every != 0) continue;
    const EmbeddingState final_state = forward_final(state0, g, mcfg);
    const MetricsReport report = evaluate_all(final_state, d, tcfg.eval_k);
    const double mean_loss = n_triples > 0 ? loss_sum / static_cast<double>(n_triples) : 0.0;
    history.evals.push_back({epoch, mean_loss, report.recall, report.precision, report.ndcg});
    if (report.recall > best_recall) {
      best_recall = report.recall;
      best = state0;
      history.epochs_to_best = epoch;
      evals_since_best = 0;
    } else {
      evals_since_best += 1;
      if (evals_since_best >= tcfg.patience) break;
    }
  }

  if (history.evals.empty()) return {std::move(state0), std::move(history)};
  return {std::move(best), std::move(history)};
}

}  // namespace socgcf
