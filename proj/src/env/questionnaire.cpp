#include "agentlab/env/questionnaire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace agentlab::questionnaire {

using nlohmann::json;

double ScaleSpec::min_value() const { return kind == ScaleKind::likert ? 1.0 : 0.0; }

double ScaleSpec::max_value() const { return kind == ScaleKind::likert ? static_cast<double>(points) : 100.0; }

double ScaleSpec::step() const { return (max_value() - min_value()) / static_cast<double>(points - 1); }

std::vector<double> ScaleSpec::values() const {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(min_value() + step() * i);
  return out;
}

bool ScaleSpec::on_scale(double v) const {
  for (double s : values()) {
    if (std::abs(s - v) < 1e-9) return true;
  }
  return false;
}

double ScaleSpec::snap(double v) const {
  const auto vs = values();
  double best = vs.front();
  for (double s : vs) {
    if (std::abs(s - v) < std::abs(best - v)) best = s;
  }
  return best;
}

double ScaleSpec::normalize(double v) const { return (v - min_value()) / (max_value() - min_value()); }

std::string_view to_string(ScaleKind kind) { return kind == ScaleKind::likert ? "likert" : "percentage"; }

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::neutral: return "neutral";
    case Variant::control: return "control";
    case Variant::treatment: return "treatment";
  }
  return "neutral";
}

void check_items(const std::vector<Item>& items) {
  std::set<std::string> ids;
  std::map<std::string, ScaleSpec> pair_scales;
  for (const auto& item : items) {
    if (!ids.insert(item.item_id).second) throw ContractViolation("duplicate item id " + item.item_id);
    if (item.scale.points < 2) throw ContractViolation("item " + item.item_id + " has fewer than 2 scale points");
    if (item.variant == Variant::neutral) continue;
    if (!item.pair_id) throw ContractViolation("item " + item.item_id + " needs a pair_id");
    auto [it, fresh] = pair_scales.emplace(*item.pair_id, item.scale);
    if (!fresh && !(it->second == item.scale)) {
      throw ContractViolation("pair " + *item.pair_id + " mixes scales");
    }
  }
}

std::vector<Item> parse_items(std::istream& in) {
  std::vector<Item> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Item item;
      item.item_id = j.at("item_id").get<std::string>();
      item.subscale = j.at("subscale").get<std::string>();
      item.text = j.at("text").get<std::string>();
      const auto& scale = j.at("scale");
      const auto kind = scale.at("kind").get<std::string>();
      if (kind == "likert") {
        item.scale = ScaleSpec::likert(scale.value("points", 7));
      } else if (kind == "percentage") {
        item.scale = ScaleSpec::percentage(scale.value("points", 11));
      } else {
        throw ContractViolation("unknown scale kind " + kind);
      }
      const auto variant = j.value("variant", "neutral");
      if (variant == "neutral") {
        item.variant = Variant::neutral;
      } else if (variant == "control") {
        item.variant = Variant::control;
      } else if (variant == "treatment") {
        item.variant = Variant::treatment;
      } else {
        throw ContractViolation("unknown variant " + variant);
      }
      if (auto p = j.find("pair_id"); p != j.end() && !p->is_null()) item.pair_id = p->get<std::string>();
      items.push_back(std::move(item));
    } catch (const std::exception& e) {
      throw ContractViolation("item bank line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  check_items(items);
  return items;
}

std::vector<Item> load_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open item bank " + path);
  return parse_items(in);
}

std::vector<std::size_t> shuffle_items(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

}  // namespace

IncompleteSheet::IncompleteSheet(std::vector<std::string> missing)
    : Error("no response for items: " + join(missing)), missing_(std::move(missing)) {}

LengthMismatch::LengthMismatch(std::size_t a, std::size_t b)
    : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}

const SubscaleScore* ScoreReport::subscale(std::string_view name) const {
  for (const auto& s : subscales) {
    if (s.subscale == name) return &s;
  }
  return nullptr;
}

const PairBias* ScoreReport::bias(std::string_view pair_id) const {
  for (const auto& b : biases) {
    if (b.pair_id == pair_id) return &b;
  }
  return nullptr;
}

ScoreReport score(const ResponseSheet& sheet, const std::vector<Item>& items) {
  std::vector<std::string> missing;
  for (const auto& item : items) {
    if (!sheet.responses.contains(item.item_id)) missing.push_back(item.item_id);
  }
  if (!missing.empty()) throw IncompleteSheet(std::move(missing));

  struct Sums {
    std::size_t n = 0;
    double raw = 0.0;
    double norm = 0.0;
  };
  std::map<std::string, Sums> subscales;
  std::map<std::string, std::pair<Sums, Sums>> pairs;  // control, treatment
  for (const auto& item : items) {
    const double v = sheet.responses.at(item.item_id);
    if (!item.scale.on_scale(v)) {
      throw ContractViolation("response " + std::to_string(v) + " is off the scale of item " + item.item_id);
    }
    const double norm = item.scale.normalize(v);
    auto& s = subscales[item.subscale];
    ++s.n;
    s.raw += v;
    s.norm += norm;
    if (item.variant != Variant::neutral) {
      auto& p = pairs[*item.pair_id];
      auto& side = item.variant == Variant::control ? p.first : p.second;
      ++side.n;
      side.norm += norm;
    }
  }

  ScoreReport report;
  for (const auto& [name, s] : subscales) {
    const auto n = static_cast<double>(s.n);
    report.subscales.push_back({name, s.n, s.raw / n, s.norm / n});
  }
  for (const auto& [id, p] : pairs) {
    if (p.first.n == 0 || p.second.n == 0) continue;
    report.biases.push_back(
        {id, p.second.norm / static_cast<double>(p.second.n) - p.first.norm / static_cast<double>(p.first.n)});
  }
  return report;
}

void write_score_csv(std::ostream& os, const ScoreReport& report) {
  const auto old = os.precision(17);
  os << "kind,name,items,raw_mean,normalized_mean,bias\n";
  for (const auto& s : report.subscales) {
    os << "subscale," << s.subscale << ',' << s.items << ',' << s.raw_mean << ',' << s.normalized_mean << ",\n";
  }
  for (const auto& b : report.biases) os << "pair," << b.pair_id << ",,,," << b.bias << '\n';
  os.precision(old);
}

double mae(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw LengthMismatch(a.size(), b.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

double sorted_ot_mae(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty()) throw LengthMismatch(a.size(), b.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return mae(a, b);
}

QuestionnaireEnvironment::QuestionnaireEnvironment(QuestionnaireConfig config) : config_(std::move(config)) {
  check_items(config_.items);
  if (config_.items.empty()) throw std::invalid_argument("questionnaire needs at least one item");
  if (config_.respondents.empty()) throw std::invalid_argument("questionnaire needs at least one respondent");
}

Schema QuestionnaireEnvironment::action_schema() {
  using namespace schema;
  return object({required("answer", integer(), "your rating on the stated scale")});
}

ObservationMap QuestionnaireEnvironment::reset(std::uint64_t seed) {
  clear_events();
  position_ = 0;
  orders_.clear();
  sheets_.clear();
  for (const auto& id : config_.respondents) {
    const std::uint64_t order_seed = RngStream(seed).child("order", id.value).origin();
    std::vector<std::size_t> order(config_.items.size());
    if (config_.shuffle) {
      order = shuffle_items(config_.items.size(), order_seed);
    } else {
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    ResponseSheet sheet;
    sheet.seed = order_seed;
    for (auto i : order) sheet.order.push_back(config_.items[i].item_id);
    orders_[id] = std::move(order);
    sheets_[id] = std::move(sheet);
  }
  return observe();
}

const Item* QuestionnaireEnvironment::current_item(AgentId who) const {
  if (done()) return nullptr;
  auto it = orders_.find(who);
  if (it == orders_.end()) return nullptr;
  return &config_.items[it->second[position_]];
}

ObservationMap QuestionnaireEnvironment::observe() const {
  ObservationMap out;
  for (const auto& id : config_.respondents) {
    Observation obs;
    obs.agent_id = id;
    obs.time = time();
    if (const Item* item = current_item(id)) {
      std::ostringstream os;
      os << config_.preamble << "\nItem " << position_ + 1 << " of " << config_.items.size() << ": " << item->text
         << "\nAnswer with one of: ";
      const auto vs = item->scale.values();
      for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? ", " : "") << vs[i];
      if (item->scale.kind == ScaleKind::likert) {
        os << " (" << item->scale.min_value() << " = strongly disagree, " << item->scale.max_value()
           << " = strongly agree)";
      } else {
        os << " (percent)";
      }
      obs.context_text = os.str();
      obs.response_schema = action_schema();
    } else {
      obs.context_text = "The questionnaire is complete.";
    }
    out.emplace(id, std::move(obs));
  }
  return out;
}

ObservationMap QuestionnaireEnvironment::step(const ActionMap& actions) {
  if (done()) throw ContractViolation("questionnaire step after the last item");
  const Schema schema = action_schema();
  for (const auto& id : config_.respondents) {
    const Item& item = *current_item(id);
    auto it = actions.find(id);
    double value = item.scale.min_value();
    if (it == actions.end()) {
      emit(id, "reject_action", {{"item_id", item.item_id}, {"reason", "no answer submitted"}});
    } else if (auto violations = validate_action(it->second.body, schema); !violations.empty()) {
      emit(id, "reject_action", {{"item_id", item.item_id}, {"reason", format_violations(violations)}});
    } else {
      const double raw = it->second.body.at("answer").get<double>();
      value = item.scale.snap(raw);
      if (value != raw) emit(id, "clamp_response", {{"item_id", item.item_id}, {"raw", raw}, {"value", value}});
    }
    sheets_[id].responses[item.item_id] = value;
    emit(id, "answer", {{"item_id", item.item_id}, {"value", value}});
  }
  ++position_;
  return observe();
}

FixedResponder::FixedResponder(const QuestionnaireEnvironment& env, AgentId id, double position, int jitter_steps)
    : env_(env), id_(id), position_(std::clamp(position, 0.0, 1.0)), jitter_(jitter_steps) {}

ActionEnvelope FixedResponder::act(const Observation& obs) {
  const Item* item = env_.current_item(id_);
  if (item == nullptr) throw ContractViolation("no current item for " + to_string(id_));
  const auto& scale = item->scale;
  long step = std::lround(position_ * (scale.points - 1));
  if (jitter_ > 0) step += static_cast<long>(rng_.between(-jitter_, jitter_));
  step = std::clamp(step, 0L, static_cast<long>(scale.points - 1));
  const double value = scale.min_value() + scale.step() * static_cast<double>(step);
  return {id_, obs.time, {{"answer", std::lround(value)}}, {}};
}

}  // namespace agentlab::questionnaire
