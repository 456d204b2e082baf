#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace polynet::harness {

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw Error(ErrorCode::Dimension, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // 1-based midranks
  std::vector<double> rank(n);
  for (std::size_t a = 0; a < n;) {
    std::size_t b = a;
    while (b + 1 < n && scores[order[b + 1]] == scores[order[a]]) ++b;
    const double mid = 0.5 * static_cast<double>(a + b) + 1.0;
    for (std::size_t c = a; c <= b; ++c) rank[order[c]] = mid;
    a = b + 1;
  }

  double n_pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (positive[i]) {
      n_pos += 1.0;
      rank_sum += rank[i];
    }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw Error(ErrorCode::Undefined, "AUC needs both positive and negative items");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

ClassificationMetrics classification_metrics(const nn::Matrix& probs, const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  const std::size_t classes = probs.cols();
  if (probs.rows() != n) throw Error(ErrorCode::Dimension, "one score row per label is required");
  if (n == 0) throw Error(ErrorCode::Undefined, "no items to evaluate");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw Error(ErrorCode::Label, "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");

  std::vector<int> predicted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = probs.row(i);
    predicted[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  std::vector<double> support(classes, 0.0), tp(classes, 0.0), predicted_count(classes, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    support[y] += 1.0;
    predicted_count[p] += 1.0;
    if (y == p) {
      tp[y] += 1.0;
      correct += 1.0;
    }
  }
  const auto present = std::count_if(support.begin(), support.end(), [](double s) { return s > 0; });
  if (present < 2) throw Error(ErrorCode::Undefined, "AUC is undefined for a single-class test set");

  ClassificationMetrics m;
  const double total = static_cast<double>(n);
  m.acc = correct / total;
  std::vector<double> scores(n);
  std::unique_ptr<bool[]> positive(new bool[n]);  // vector<bool> has no span view
  for (std::size_t c = 0; c < classes; ++c) {
    if (support[c] == 0.0) continue;
    const double w = support[c] / total;
    const double precision = predicted_count[c] > 0 ? tp[c] / predicted_count[c] : 0.0;
    const double recall = tp[c] / support[c];
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.precision += w * precision;
    m.f1 += w * f1;

    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = probs(i, c);
      positive[i] = labels[i] == static_cast<int>(c);
    }
    m.auc += w * binary_auc(scores, std::span<const bool>(positive.get(), n));
  }
  return m;
}

double average_precision(std::span<const bool> ranked_relevance) {
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ranked_relevance.size(); ++r) {
    if (!ranked_relevance[r]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(r + 1);
  }
  return hits > 0 ? sum / hits : 0.0;
}

double ndcg_at(std::span<const bool> ranked_relevance, std::size_t k) {
  const std::size_t relevant =
      static_cast<std::size_t>(std::count(ranked_relevance.begin(), ranked_relevance.end(), true));
  k = std::min(k, ranked_relevance.size());
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const double discount = 1.0 / std::log2(static_cast<double>(r) + 2.0);
    if (ranked_relevance[r]) dcg += discount;
    if (r < relevant) ideal += discount;
  }
  return ideal > 0 ? dcg / ideal : 0.0;
}

RetrievalMetrics retrieval_metrics(const nn::Matrix& embeddings, const std::vector<int>& labels, Similarity similarity,
                                   std::vector<std::string>* warnings) {
  const std::size_t n = labels.size();
  if (embeddings.rows() != n) throw Error(ErrorCode::Dimension, "one embedding per label is required");

  std::vector<double> norms(n, 1.0);
  if (similarity == Similarity::Cosine)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : embeddings.row(i)) s += v * v;
      norms[i] = s > 0 ? std::sqrt(s) : 1.0;
    }
  auto score = [&](std::size_t a, std::size_t b) {
    const auto x = embeddings.row(a);
    const auto y = embeddings.row(b);
    double s = 0.0;
    if (similarity == Similarity::Cosine) {
      for (std::size_t c = 0; c < x.size(); ++c) s += x[c] * y[c];
      return s / (norms[a] * norms[b]);
    }
    for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    return -std::sqrt(s);
  };

  RetrievalMetrics m;
  std::vector<std::size_t> order;
  std::vector<double> sim(n);
  std::unique_ptr<bool[]> relevance(new bool[n]);
  for (std::size_t q = 0; q < n; ++q) {
    const auto k = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), labels[q])) - 1;
    if (k == 0) {
      ++m.skipped;
      if (warnings) warnings->push_back("query " + std::to_string(q) + " has no other item of its class; skipped");
      continue;
    }
    order.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i != q) {
        order.push_back(i);
        sim[i] = score(q, i);
      }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    for (std::size_t r = 0; r < order.size(); ++r) relevance[r] = labels[order[r]] == labels[q];
    const std::span<const bool> ranked(relevance.get(), order.size());

    const double hits = static_cast<double>(std::count(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), true));
    const double precision = hits / static_cast<double>(k);
    const double recall = hits / static_cast<double>(k);
    m.precision += precision;
    m.recall += recall;
    m.f1 += precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.map += average_precision(ranked);
    m.ndcg += ndcg_at(ranked, k);
    ++m.queries;
  }
  if (m.queries > 0) {
    const double q = m.queries;
    m.precision /= q;
    m.recall /= q;
    m.f1 /= q;
    m.map /= q;
    m.ndcg /= q;
  }
  return m;
}

}  // namespace polynet::harness
