#include <gtest/gtest.h>

#include <sstream>

#include "agentlab/core/episode.hpp"
#include "agentlab/env/social.hpp"
#include "support/oracles.hpp"

using namespace agentlab;
using namespace agentlab::social;
using nlohmann::json;

namespace {

FollowGraph line_graph() {
  // 1 and 2 follow 0; 0 follows nobody.
  FollowGraph g;
  g[AgentId(0)] = {AgentId(0), "", {}};
  g[AgentId(1)] = {AgentId(1), "", {AgentId(0)}};
  g[AgentId(2)] = {AgentId(2), "", {AgentId(0), AgentId(1)}};
  return g;
}

SocialAction post(std::string text) { return {ActionKind::create_post, std::move(text), std::nullopt}; }
SocialAction comment(PostId p, std::string text) { return {ActionKind::create_comment, std::move(text), p}; }

struct SocialRun {
  std::unique_ptr<SocialEnvironment> env;
  std::vector<std::unique_ptr<RandomSocialUser>> users;
  EpisodeLog log;
};

SocialRun run_random(std::size_t agents, int steps, std::uint64_t seed) {
  SocialConfig cfg;
  cfg.agents = agents;
  cfg.steps = steps;
  cfg.seed_posts = {"welcome"};
  SocialRun r;
  r.env = std::make_unique<SocialEnvironment>(cfg);
  AgentRoster roster;
  for (std::uint32_t i = 0; i < agents; ++i) {
    r.users.push_back(std::make_unique<RandomSocialUser>(*r.env, AgentId(i)));
    roster[AgentId(i)] = r.users.back().get();
  }
  r.log = run_episode(*r.env, roster, 1000, seed);
  return r;
}

}  // namespace

TEST(Actions, DenseIdsAndInfoShapes) {
  SocialState s;
  auto r1 = apply_social_action(AgentId(0), 1, post("a"), s);
  auto r2 = apply_social_action(AgentId(1), 1, post("b"), s);
  auto r3 = apply_social_action(AgentId(1), 2, comment(1, "nice"), s);
  auto r4 = apply_social_action(AgentId(2), 2, {ActionKind::like_post, std::nullopt, 2}, s);
  auto r5 = apply_social_action(AgentId(2), 2, {}, s);
  EXPECT_EQ(r1.info, json({{"content", "a"}, {"post_id", 1}}));
  EXPECT_EQ(r2.info["post_id"], 2);
  EXPECT_EQ(r3.info, json({{"content", "nice"}, {"comment_id", 1}, {"post_id", 1}}));
  EXPECT_EQ(r4.action, "like_post");
  EXPECT_EQ(r4.info, json({{"post_id", 2}}));
  EXPECT_EQ(r5.action, "do_nothing");
  EXPECT_EQ(r5.info, json::object());
  EXPECT_EQ(s.find_post(2)->likes, std::set<AgentId>{AgentId(2)});
  EXPECT_EQ(s.comments_on(1).size(), 1u);
  EXPECT_EQ(s.find_post(3), nullptr);
}

TEST(Actions, ErrorsLeaveStateUnchanged) {
  SocialState s;
  apply_social_action(AgentId(0), 1, post("a"), s);
  const SocialState before = s;
  EXPECT_THROW(apply_social_action(AgentId(1), 2, comment(9, "x"), s), UnknownPost);
  EXPECT_THROW(apply_social_action(AgentId(1), 2, {ActionKind::create_comment, std::nullopt, 1}, s), ContractViolation);
  EXPECT_THROW(apply_social_action(AgentId(1), 2, {ActionKind::like_post, std::nullopt, std::nullopt}, s),
               ContractViolation);
  EXPECT_THROW(apply_social_action(AgentId(1), 2, {ActionKind::create_post, std::nullopt, std::nullopt}, s),
               ContractViolation);
  EXPECT_EQ(s, before);
}

TEST(Actions, LikesAreIdempotent) {
  SocialState s;
  apply_social_action(AgentId(0), 1, post("a"), s);
  for (int i = 0; i < 3; ++i) apply_social_action(AgentId(1), 1, {ActionKind::like_post, std::nullopt, 1}, s);
  EXPECT_EQ(s.posts[0].likes.size(), 1u);
}

TEST(Feed, FollowedPostsAndOwnRepliedPosts) {
  auto g = line_graph();
  SocialState s;
  apply_social_action(AgentId(0), 0, post("seed"), s);   // 1
  apply_social_action(AgentId(1), 1, post("mine"), s);   // 2
  apply_social_action(AgentId(1), 1, post("quiet"), s);  // 3
  apply_social_action(AgentId(2), 2, comment(2, "re"), s);
  apply_social_action(AgentId(1), 2, comment(3, "self"), s);

  auto ids = [](const std::vector<FeedEntry>& f) {
    std::vector<PostId> out;
    for (const auto& e : f) out.push_back(e.post.post_id);
    return out;
  };
  EXPECT_EQ(ids(build_feed(AgentId(1), g, s, 10, 5)), (std::vector<PostId>{2, 1}));
  EXPECT_EQ(ids(build_feed(AgentId(1), g, s, 10, 1)), (std::vector<PostId>{1}));
  EXPECT_EQ(ids(build_feed(AgentId(2), g, s, 10, 5)), (std::vector<PostId>{3, 2, 1}));
  EXPECT_EQ(ids(build_feed(AgentId(2), g, s, 2, 5)), (std::vector<PostId>{3, 2}));
  EXPECT_TRUE(build_feed(AgentId(0), g, s, 10, 5).empty());
  EXPECT_EQ(render_feed({}), "Your feed is empty.");
  const auto text = render_feed(build_feed(AgentId(1), g, s, 10, 5));
  EXPECT_NE(text.find("[post 2 by user 1 at t=1, 0 likes] mine"), std::string::npos);
  EXPECT_NE(text.find("[comment 1 by user 2] re"), std::string::npos);
}

TEST(Graph, ProfilesParseAndCheck) {
  std::istringstream in(R"({"agent_id":0,"bio":"writer","follows":[]}
{"agent_id":1,"bio":"reader","follows":[0]})");
  auto g = parse_profiles(in);
  EXPECT_EQ(g.at(AgentId(1)).follows, std::set<AgentId>{AgentId(0)});
  EXPECT_EQ(g.at(AgentId(0)).bio, "writer");
  FollowGraph self;
  self[AgentId(0)] = {AgentId(0), "", {AgentId(0)}};
  EXPECT_THROW(check_graph(self), ContractViolation);
  FollowGraph dangling;
  dangling[AgentId(0)] = {AgentId(0), "", {AgentId(4)}};
  EXPECT_THROW(check_graph(dangling), ContractViolation);
}

TEST(Environment, CommentsNotifyAuthorsAndTimeAdvancesFirst) {
  SocialConfig cfg;
  cfg.profiles = line_graph();
  cfg.steps = 2;
  cfg.seed_posts = {"hello"};
  SocialEnvironment env(cfg);
  auto obs = env.reset(0);
  auto seeded = env.drain_events();
  ASSERT_EQ(seeded.size(), 1u);
  EXPECT_EQ(seeded[0].current_time, 0);
  EXPECT_NE(obs.at(AgentId(1)).context_text.find("hello"), std::string::npos);

  ActionMap acts;
  acts[AgentId(1)] = {AgentId(1), 0, {{"action", "create_comment"}, {"post_id", 1}, {"content", "hi"}}, {}};
  acts[AgentId(2)] = {AgentId(2), 0, {{"action", "like_post"}, {"post_id", 7}}, {}};
  obs = env.step(acts);
  ASSERT_EQ(obs.at(AgentId(0)).inbox.size(), 1u);
  EXPECT_EQ(obs.at(AgentId(0)).inbox[0].src_agent_id, AgentId(1));
  EXPECT_TRUE(obs.at(AgentId(1)).inbox.empty());
  const auto events = env.drain_events();
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].current_time, 1);
  EXPECT_EQ(events[1].action, "reject_action");
  EXPECT_EQ(events[1].info["post_id"], 7);
}

TEST(Environment, ReplayIdentityDenseIdsAndFeedOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = run_random(25, 6, seed);
    const auto& s = r.env->state();
    EXPECT_EQ(replay_events(r.log.records), s);
    for (std::size_t i = 0; i < s.posts.size(); ++i) EXPECT_EQ(s.posts[i].post_id, static_cast<PostId>(i + 1));
    for (std::size_t i = 0; i < s.comments.size(); ++i) {
      EXPECT_EQ(s.comments[i].comment_id, static_cast<CommentId>(i + 1));
    }
    for (std::uint32_t u = 0; u < 25; ++u) {
      for (TimeStep now = 0; now <= 6; ++now) {
        std::vector<PostId> got;
        for (const auto& e : build_feed(AgentId(u), r.env->graph(), s, 10, now)) got.push_back(e.post.post_id);
        ASSERT_EQ(got, oracle::feed_ids(AgentId(u), r.env->graph(), s, 10, now));
      }
    }
  }
}

TEST(Environment, SameSeedSameLog) {
  EXPECT_EQ(to_jsonl(run_random(30, 5, 4).log), to_jsonl(run_random(30, 5, 4).log));
  EXPECT_NE(to_jsonl(run_random(30, 5, 4).log), to_jsonl(run_random(30, 5, 5).log));
}

TEST(Environment, StarGraphAroundInfluencer) {
  SocialConfig cfg;
  cfg.agents = 12;
  cfg.extra_follow_probability = 0;
  SocialEnvironment env(cfg);
  env.reset(1);
  for (const auto& [id, p] : env.graph()) {
    if (id == AgentId(0)) {
      EXPECT_TRUE(p.follows.empty());
    } else {
      EXPECT_EQ(p.follows, std::set<AgentId>{AgentId(0)});
    }
  }
  cfg.influencer = AgentId(20);
  EXPECT_THROW(SocialEnvironment{cfg}, std::invalid_argument);
}
