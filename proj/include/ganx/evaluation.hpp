#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ganx/datasets.hpp"
#include "ganx/explainer.hpp"
#include "ganx/gnn.hpp"

namespace ganx {

struct InstanceRecord {
  int id = -1;
  int original_prediction = -1;
  int explanation_prediction = -1;
  bool match = false;
};

// ACC_exp at one K: the fraction of test instances whose explanation, fed
// back into the frozen model, reproduces the model's original prediction.
// The comparison is against the model's prediction, never the dataset label.
struct AccuracyReport {
  std::string dataset;
  int k = 0;
  double accuracy = 0.0;
  int n_test = 0;
  std::vector<InstanceRecord> records;

  // accuracy recomputed from the per-instance records; always equals
  // `accuracy`.
  double recompute() const;
};

AccuracyReport explanation_accuracy(const TargetModel& model, const Generator& gen,
                                    const DatasetBundle& bundle, int k, int hops = 3);

// One report per K, explanations generated once per instance and re-cut per
// K. Deterministic ordering.
std::vector<AccuracyReport> sweep(const TargetModel& model, const Generator& gen,
                                  const DatasetBundle& bundle, const std::vector<int>& ks,
                                  int hops = 3);

// CSV with header dataset,K,accuracy,n_test. Accuracy round-trips exactly.
std::string reports_to_csv(const std::vector<AccuracyReport>& reports);
struct CsvRow {
  std::string dataset;
  int k;
  double accuracy;
  int n_test;
};
std::vector<CsvRow> csv_rows_from_string(const std::string& csv);

std::string records_to_json(const AccuracyReport& report);
AccuracyReport records_from_json(const std::string& text);

// Graphviz export: node fill by predicted class, explained node double-
// circled, explanation edges bold, everything else thin. `predictions` holds
// one predicted class per node of g.
std::string export_dot(const Graph& g, const Explanation& exp,
                       const std::vector<int>& predictions, std::optional<int> target);

}  // namespace ganx
