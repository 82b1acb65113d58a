#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/errors.hpp"
#include "agentlab/core/message.hpp"

namespace agentlab::social {

using PostId = std::int64_t;
using CommentId = std::int64_t;

struct UserProfile {
  AgentId agent;
  std::string bio;
  std::set<AgentId> follows;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

using FollowGraph = std::map<AgentId, UserProfile>;

struct Post {
  PostId post_id = 0;
  AgentId author;
  TimeStep time = 0;
  std::string content;
  std::set<AgentId> likes;

  friend bool operator==(const Post&, const Post&) = default;
};

struct Comment {
  CommentId comment_id = 0;
  PostId post_id = 0;
  AgentId author;
  TimeStep time = 0;
  std::string content;

  friend bool operator==(const Comment&, const Comment&) = default;
};

enum class ActionKind { create_post, create_comment, like_post, do_nothing };

std::string_view to_string(ActionKind kind);
ActionKind action_kind_from_string(std::string_view text);

struct SocialAction {
  ActionKind kind = ActionKind::do_nothing;
  std::optional<std::string> content;
  std::optional<PostId> target_post;
};

// Post i lives at posts[i - 1], comment j at comments[j - 1].
struct SocialState {
  std::vector<Post> posts;
  std::vector<Comment> comments;

  const Post* find_post(PostId id) const;
  std::vector<const Comment*> comments_on(PostId id) const;

  friend bool operator==(const SocialState&, const SocialState&) = default;
};

class UnknownPost : public Error {
 public:
  explicit UnknownPost(PostId id) : Error("no post with id " + std::to_string(id)), id_(id) {}
  PostId post_id() const { return id_; }

 private:
  PostId id_;
};

// Throws ContractViolation for self-follows or follows of unknown users.
void check_graph(const FollowGraph& graph);

// Newline-delimited {agent_id, bio, follows: [ids]}.
FollowGraph parse_profiles(std::istream& in);
FollowGraph load_profiles(const std::string& path);

struct FeedEntry {
  Post post;
  std::vector<Comment> comments;
};

// Posts by followed users plus the user's own posts that have replies from
// others, newest first (time, then post_id, descending), cut to cap. Only
// posts and comments with time <= now are visible.
std::vector<FeedEntry> build_feed(AgentId user, const FollowGraph& graph, const SocialState& state,
                                  std::size_t cap, TimeStep now);

std::string render_feed(const std::vector<FeedEntry>& feed);

// Throws ContractViolation when the action misses a field its kind needs, and
// UnknownPost when the target does not exist. Neither changes the state.
EventRecord apply_social_action(AgentId user, TimeStep time, const SocialAction& action, SocialState& state);

// Adds a t=0 post by the influencer and returns its id.
PostId seed_influencer(SocialState& state, AgentId influencer, const std::string& content);

// Rebuilds the tables from create_post / create_comment / like_post records;
// every other action is skipped.
SocialState replay_events(const std::vector<EventRecord>& records);

struct SocialConfig {
  std::size_t agents = 111;
  int steps = 10;
  std::size_t feed_cap = 10;
  AgentId influencer{0};
  std::vector<std::string> seed_posts;
  // Used when non-empty; otherwise a star graph around the influencer is
  // generated, plus random extra follows with this probability.
  FollowGraph profiles;
  double extra_follow_probability = 0.05;
  std::vector<std::string> bios;
};

// Event log actions: create_post, create_comment, like_post, do_nothing,
// reject_action. Comments notify the post author through the inbox.
class SocialEnvironment final : public Environment {
 public:
  explicit SocialEnvironment(SocialConfig config);

  std::string_view name() const override { return "social"; }
  ObservationMap reset(std::uint64_t seed) override;
  ObservationMap step(const ActionMap& actions) override;
  bool done() const override { return time_ >= config_.steps; }
  TimeStep time() const override { return time_; }

  static Schema action_schema();
  static nlohmann::json passive_action() { return {{"action", "do_nothing"}}; }

  const SocialState& state() const { return state_; }
  const FollowGraph& graph() const { return graph_; }
  std::vector<FeedEntry> feed(AgentId user) const;

 private:
  ObservationMap observe(const std::map<AgentId, std::vector<Message>>& inboxes) const;

  SocialConfig config_;
  FollowGraph graph_;
  SocialState state_;
  TimeStep time_ = 0;
};

// Seeded user that posts, comments on and likes whatever is in its feed.
class RandomSocialUser final : public AgentPolicy {
 public:
  RandomSocialUser(const SocialEnvironment& env, AgentId id);
  ActionEnvelope act(const Observation& obs) override;
  void seed(const RngStream& stream) override { rng_ = stream; }

 private:
  const SocialEnvironment& env_;
  AgentId id_;
  RngStream rng_{0};
};

}  // namespace agentlab::social
