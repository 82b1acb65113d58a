#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/errors.hpp"

namespace agentlab::questionnaire {

enum class ScaleKind { likert, percentage };

// Likert scales run 1..points; percentage scales run 0..100 in
// points - 1 equal steps.
struct ScaleSpec {
  ScaleKind kind = ScaleKind::likert;
  int points = 7;

  static ScaleSpec likert(int points = 7) { return {ScaleKind::likert, points}; }
  static ScaleSpec percentage(int points = 11) { return {ScaleKind::percentage, points}; }

  double min_value() const;
  double max_value() const;
  double step() const;
  std::vector<double> values() const;
  bool on_scale(double v) const;
  // Nearest on-scale value; ties go to the lower one.
  double snap(double v) const;
  double normalize(double v) const;

  friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;
};

enum class Variant { neutral, control, treatment };

std::string_view to_string(ScaleKind kind);
std::string_view to_string(Variant variant);

struct Item {
  std::string item_id;
  std::string subscale;
  std::string text;
  ScaleSpec scale;
  Variant variant = Variant::neutral;
  std::optional<std::string> pair_id;
};

// Unique ids, valid scales, control/treatment items carry a pair_id and a
// pair shares one scale. Throws ContractViolation.
void check_items(const std::vector<Item>& items);

// Newline-delimited {item_id, subscale, text, scale: {kind, points}, variant,
// pair_id?}.
std::vector<Item> parse_items(std::istream& in);
std::vector<Item> load_items(const std::string& path);

// Seeded Fisher-Yates over item indices.
std::vector<std::size_t> shuffle_items(std::size_t count, std::uint64_t seed);

struct ResponseSheet {
  std::map<std::string, double> responses;  // item_id -> raw value
  std::vector<std::string> order;           // administered item ids
  std::uint64_t seed = 0;
};

class IncompleteSheet : public Error {
 public:
  explicit IncompleteSheet(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b);
};

struct SubscaleScore {
  std::string subscale;
  std::size_t items = 0;
  double raw_mean = 0.0;
  double normalized_mean = 0.0;
};

struct PairBias {
  std::string pair_id;
  double bias = 0.0;  // mean normalized treatment - mean normalized control
};

struct ScoreReport {
  std::vector<SubscaleScore> subscales;  // sorted by name
  std::vector<PairBias> biases;          // sorted by pair_id

  const SubscaleScore* subscale(std::string_view name) const;
  const PairBias* bias(std::string_view pair_id) const;
};

// Throws IncompleteSheet when an item has no response, ContractViolation when
// a response is off its scale.
ScoreReport score(const ResponseSheet& sheet, const std::vector<Item>& items);

// kind,name,items,raw_mean,normalized_mean,bias
void write_score_csv(std::ostream& os, const ScoreReport& report);

double mae(std::span<const double> a, std::span<const double> b);

// 1-D optimal transport cost with |a - b| ground cost: sort both, pair up.
double sorted_ot_mae(std::vector<double> a, std::vector<double> b);

struct QuestionnaireConfig {
  std::vector<Item> items;
  std::vector<AgentId> respondents{AgentId(0)};
  bool shuffle = true;
  std::string preamble = "Answer the following questionnaire item.";
};

// One item per step for every respondent. Each respondent gets its own seeded
// order. Event log actions: answer, clamp_response, reject_action.
class QuestionnaireEnvironment final : public Environment {
 public:
  explicit QuestionnaireEnvironment(QuestionnaireConfig config);

  std::string_view name() const override { return "questionnaire"; }
  ObservationMap reset(std::uint64_t seed) override;
  ObservationMap step(const ActionMap& actions) override;
  bool done() const override { return position_ >= config_.items.size(); }
  TimeStep time() const override { return static_cast<TimeStep>(position_); }

  static Schema action_schema();
  static nlohmann::json passive_action() { return {{"answer", 0}}; }

  const std::vector<Item>& items() const { return config_.items; }
  const std::map<AgentId, ResponseSheet>& sheets() const { return sheets_; }
  const Item* current_item(AgentId who) const;

 private:
  ObservationMap observe() const;

  QuestionnaireConfig config_;
  std::map<AgentId, std::vector<std::size_t>> orders_;
  std::map<AgentId, ResponseSheet> sheets_;
  std::size_t position_ = 0;
};

// Answers every item with a fixed on-scale position in [0, 1]
// (0 = scale minimum), optionally jittered by a seeded number of steps.
class FixedResponder final : public AgentPolicy {
 public:
  FixedResponder(const QuestionnaireEnvironment& env, AgentId id, double position, int jitter_steps = 0);
  ActionEnvelope act(const Observation& obs) override;
  void seed(const RngStream& stream) override { rng_ = stream; }

 private:
  const QuestionnaireEnvironment& env_;
  AgentId id_;
  double position_;
  int jitter_;
  RngStream rng_{0};
};

}  // namespace agentlab::questionnaire
