#include "agentlab/env/social.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace agentlab::social {

using nlohmann::json;

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::create_post: return "create_post";
    case ActionKind::create_comment: return "create_comment";
    case ActionKind::like_post: return "like_post";
    case ActionKind::do_nothing: return "do_nothing";
  }
  return "do_nothing";
}

ActionKind action_kind_from_string(std::string_view text) {
  for (auto k : {ActionKind::create_post, ActionKind::create_comment, ActionKind::like_post, ActionKind::do_nothing}) {
    if (to_string(k) == text) return k;
  }
  throw ContractViolation("unknown social action " + std::string(text));
}

const Post* SocialState::find_post(PostId id) const {
  if (id < 1 || id > static_cast<PostId>(posts.size())) return nullptr;
  return &posts[static_cast<std::size_t>(id - 1)];
}

std::vector<const Comment*> SocialState::comments_on(PostId id) const {
  std::vector<const Comment*> out;
  for (const auto& c : comments) {
    if (c.post_id == id) out.push_back(&c);
  }
  return out;
}

void check_graph(const FollowGraph& graph) {
  for (const auto& [id, profile] : graph) {
    if (profile.agent != id) throw ContractViolation("profile key does not match agent " + to_string(id));
    for (const auto& f : profile.follows) {
      if (f == id) throw ContractViolation(to_string(id) + " follows itself");
      if (!graph.contains(f)) throw ContractViolation(to_string(id) + " follows unknown " + to_string(f));
    }
  }
}

FollowGraph parse_profiles(std::istream& in) {
  FollowGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      UserProfile p;
      p.agent = j.at("agent_id").get<AgentId>();
      p.bio = j.value("bio", "");
      for (const auto& f : j.value("follows", json::array())) p.follows.insert(f.get<AgentId>());
      if (!graph.emplace(p.agent, p).second) throw ContractViolation("duplicate profile for " + to_string(p.agent));
    } catch (const json::exception& e) {
      throw ContractViolation("profiles line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  check_graph(graph);
  return graph;
}

FollowGraph load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open profiles file " + path);
  return parse_profiles(in);
}

std::vector<FeedEntry> build_feed(AgentId user, const FollowGraph& graph, const SocialState& state,
                                  std::size_t cap, TimeStep now) {
  const auto profile = graph.find(user);
  std::map<PostId, std::vector<const Comment*>> visible;
  for (const auto& c : state.comments) {
    if (c.time <= now) visible[c.post_id].push_back(&c);
  }
  std::vector<const Post*> picked;
  for (const auto& post : state.posts) {
    if (post.time > now) continue;
    const bool followed = profile != graph.end() && profile->second.follows.contains(post.author);
    bool own_with_replies = false;
    if (post.author == user) {
      if (auto it = visible.find(post.post_id); it != visible.end()) {
        own_with_replies = std::any_of(it->second.begin(), it->second.end(),
                                       [&](const Comment* c) { return c->author != user; });
      }
    }
    if (followed || own_with_replies) picked.push_back(&post);
  }
  std::sort(picked.begin(), picked.end(), [](const Post* a, const Post* b) {
    if (a->time != b->time) return a->time > b->time;
    return a->post_id > b->post_id;
  });
  if (picked.size() > cap) picked.resize(cap);
  std::vector<FeedEntry> feed;
  feed.reserve(picked.size());
  for (const Post* post : picked) {
    FeedEntry entry{*post, {}};
    if (auto it = visible.find(post->post_id); it != visible.end()) {
      for (const Comment* c : it->second) entry.comments.push_back(*c);
    }
    feed.push_back(std::move(entry));
  }
  return feed;
}

std::string render_feed(const std::vector<FeedEntry>& feed) {
  if (feed.empty()) return "Your feed is empty.";
  std::ostringstream os;
  os << "Your feed:";
  for (const auto& e : feed) {
    os << "\n[post " << e.post.post_id << " by user " << e.post.author.value << " at t=" << e.post.time << ", "
       << e.post.likes.size() << " likes] " << e.post.content;
    for (const auto& c : e.comments) {
      os << "\n    [comment " << c.comment_id << " by user " << c.author.value << "] " << c.content;
    }
  }
  return os.str();
}

EventRecord apply_social_action(AgentId user, TimeStep time, const SocialAction& action, SocialState& state) {
  const std::string kind(to_string(action.kind));
  const bool needs_target = action.kind == ActionKind::create_comment || action.kind == ActionKind::like_post;
  const bool needs_content = action.kind == ActionKind::create_post || action.kind == ActionKind::create_comment;
  if (needs_target && !action.target_post) throw ContractViolation(kind + " needs a post_id");
  if (needs_content && !action.content) throw ContractViolation(kind + " needs content");
  if (needs_target && state.find_post(*action.target_post) == nullptr) throw UnknownPost(*action.target_post);

  EventRecord rec{user, time, kind, json::object()};
  switch (action.kind) {
    case ActionKind::create_post: {
      const PostId id = static_cast<PostId>(state.posts.size()) + 1;
      state.posts.push_back({id, user, time, *action.content, {}});
      rec.info = {{"content", *action.content}, {"post_id", id}};
      break;
    }
    case ActionKind::create_comment: {
      const CommentId id = static_cast<CommentId>(state.comments.size()) + 1;
      state.comments.push_back({id, *action.target_post, user, time, *action.content});
      rec.info = {{"content", *action.content}, {"comment_id", id}, {"post_id", *action.target_post}};
      break;
    }
    case ActionKind::like_post:
      state.posts[static_cast<std::size_t>(*action.target_post - 1)].likes.insert(user);
      rec.info = {{"post_id", *action.target_post}};
      break;
    case ActionKind::do_nothing:
      break;
  }
  return rec;
}

PostId seed_influencer(SocialState& state, AgentId influencer, const std::string& content) {
  SocialAction a{ActionKind::create_post, content, std::nullopt};
  return apply_social_action(influencer, 0, a, state).info.at("post_id").get<PostId>();
}

SocialState replay_events(const std::vector<EventRecord>& records) {
  SocialState state;
  for (const auto& r : records) {
    SocialAction a;
    if (r.action == "create_post") {
      a = {ActionKind::create_post, r.info.at("content").get<std::string>(), std::nullopt};
    } else if (r.action == "create_comment") {
      a = {ActionKind::create_comment, r.info.at("content").get<std::string>(), r.info.at("post_id").get<PostId>()};
    } else if (r.action == "like_post") {
      a = {ActionKind::like_post, std::nullopt, r.info.at("post_id").get<PostId>()};
    } else {
      continue;
    }
    apply_social_action(r.user_id, r.current_time, a, state);
  }
  return state;
}

SocialEnvironment::SocialEnvironment(SocialConfig config) : config_(std::move(config)) {
  if (config_.profiles.empty()) {
    if (config_.agents < 1) throw std::invalid_argument("social network needs at least one user");
    if (config_.influencer.value >= config_.agents) throw std::invalid_argument("influencer outside the population");
  } else {
    check_graph(config_.profiles);
    if (!config_.profiles.contains(config_.influencer)) throw std::invalid_argument("influencer has no profile");
  }
}

Schema SocialEnvironment::action_schema() {
  using namespace schema;
  return object({
      required("action", one_of({"do_nothing", "create_post", "create_comment", "like_post"})),
      optional("content", text(), "text of a new post or comment"),
      optional("post_id", integer(), "post to comment on or like"),
  });
}

ObservationMap SocialEnvironment::reset(std::uint64_t seed) {
  clear_events();
  state_ = SocialState{};
  time_ = 0;
  if (!config_.profiles.empty()) {
    graph_ = config_.profiles;
  } else {
    graph_.clear();
    RngStream rng = RngStream(seed).child("follows");
    for (std::uint32_t i = 0; i < config_.agents; ++i) {
      UserProfile p{AgentId(i), {}, {}};
      if (!config_.bios.empty()) p.bio = config_.bios[i % config_.bios.size()];
      if (p.agent != config_.influencer) p.follows.insert(config_.influencer);
      for (std::uint32_t j = 0; j < config_.agents; ++j) {
        if (j == i) continue;
        if (rng.bernoulli(config_.extra_follow_probability)) p.follows.insert(AgentId(j));
      }
      graph_.emplace(p.agent, std::move(p));
    }
  }
  for (const auto& text : config_.seed_posts) {
    SocialAction a{ActionKind::create_post, text, std::nullopt};
    const EventRecord rec = apply_social_action(config_.influencer, 0, a, state_);
    emit(rec.user_id, rec.action, rec.info);
  }
  return observe({});
}

std::vector<FeedEntry> SocialEnvironment::feed(AgentId user) const {
  return build_feed(user, graph_, state_, config_.feed_cap, time_);
}

ObservationMap SocialEnvironment::observe(const std::map<AgentId, std::vector<Message>>& inboxes) const {
  ObservationMap out;
  for (const auto& [id, profile] : graph_) {
    Observation obs;
    obs.agent_id = id;
    obs.time = time_;
    if (auto it = inboxes.find(id); it != inboxes.end()) obs.inbox = it->second;
    std::ostringstream os;
    os << "You are user " << id.value << " on a social network.";
    if (!profile.bio.empty()) os << " Your profile: " << profile.bio;
    os << '\n' << render_feed(feed(id));
    if (!done()) {
      os << "\nYou may create a post, comment on a post, like a post, or do nothing.";
      obs.response_schema = action_schema();
    }
    obs.context_text = os.str();
    out.emplace(id, std::move(obs));
  }
  return out;
}

ObservationMap SocialEnvironment::step(const ActionMap& actions) {
  if (done()) throw ContractViolation("social step after the last step");
  ++time_;
  const Schema schema = action_schema();
  std::vector<Message> outbox;
  for (const auto& [id, envelope] : actions) {
    if (!graph_.contains(id)) throw AgentMissing(id);
    for (const auto& m : envelope.outgoing_messages) outbox.push_back(m);
    if (auto violations = validate_action(envelope.body, schema); !violations.empty()) {
      emit(id, "reject_action", {{"reason", format_violations(violations)}});
      continue;
    }
    SocialAction a;
    a.kind = action_kind_from_string(envelope.body.at("action").get<std::string>());
    if (auto c = envelope.body.find("content"); c != envelope.body.end() && !c->is_null()) {
      a.content = c->get<std::string>();
    }
    if (auto p = envelope.body.find("post_id"); p != envelope.body.end() && !p->is_null()) {
      a.target_post = p->get<PostId>();
    }
    try {
      const EventRecord rec = apply_social_action(id, time_, a, state_);
      emit(rec.user_id, rec.action, rec.info);
      if (a.kind == ActionKind::create_comment) {
        const Post* post = state_.find_post(*a.target_post);
        if (post->author != id) {
          outbox.push_back({time_, id, post->author,
                            {{"text", "user " + std::to_string(id.value) + " commented on your post " +
                                          std::to_string(post->post_id) + ": " + *a.content},
                             {"post_id", post->post_id},
                             {"comment_id", rec.info.at("comment_id")}}});
        }
      }
    } catch (const UnknownPost& e) {
      emit(id, "reject_action", {{"reason", e.what()}, {"post_id", e.post_id()}});
    } catch (const ContractViolation& e) {
      emit(id, "reject_action", {{"reason", e.what()}});
    }
  }
  std::set<AgentId> population;
  for (const auto& [id, p] : graph_) population.insert(id);
  return observe(route_messages(outbox, population));
}

RandomSocialUser::RandomSocialUser(const SocialEnvironment& env, AgentId id) : env_(env), id_(id) {}

ActionEnvelope RandomSocialUser::act(const Observation& obs) {
  const auto feed = env_.feed(id_);
  const double u = rng_.uniform();
  json body;
  if (feed.empty() || u < 0.2) {
    body = u < 0.3 ? json{{"action", "create_post"},
                          {"content", "user " + std::to_string(id_.value) + " at t=" + std::to_string(obs.time)}}
                   : SocialEnvironment::passive_action();
  } else {
    const auto& pick = feed[rng_.below(feed.size())].post;
    if (u < 0.6) {
      body = {{"action", "create_comment"},
              {"post_id", pick.post_id},
              {"content", "reply from user " + std::to_string(id_.value)}};
    } else if (u < 0.85) {
      body = {{"action", "like_post"}, {"post_id", pick.post_id}};
    } else {
      body = {{"action", "create_post"}, {"content", "thoughts of user " + std::to_string(id_.value)}};
    }
  }
  return {id_, obs.time, std::move(body), {}};
}

}  // namespace agentlab::social
