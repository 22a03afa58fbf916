#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trustweave/trust_store.hpp"

using namespace trustweave;

namespace {
const TrustContext kCtx = TrustContext::make_good_assertions();
}

TEST_CASE("record_arc inserts, replaces and rejects foreign arcs") {
  TrustStore store("A");
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.8));
  CHECK(store.size() == 1);
  CHECK(store.direct_rating("B", kCtx, ArcKind::Performance)->get() == 0.8);

  // last write wins for the same quadruple
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.6));
  CHECK(store.size() == 1);
  CHECK(store.direct_rating("B", kCtx, ArcKind::Performance)->get() == 0.6);

  // idempotent for an identical arc
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.6));
  CHECK(store.size() == 1);

  CHECK_THROWS(store.record_arc(make_performance_arc("C", "B", kCtx, 0.5)));
}

TEST_CASE("direct_rating distinguishes context, kind and trustee") {
  TrustStore store("A");
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.8));
  CHECK(store.direct_rating("B", kCtx, ArcKind::Performance).has_value());
  CHECK_FALSE(store.direct_rating("B", TrustContext::maintain_privacy(),
                                  ArcKind::Performance)
                  .has_value());
  CHECK_FALSE(store.direct_rating("C", kCtx, ArcKind::Performance).has_value());
  CHECK_FALSE(store.direct_rating("B", kCtx, ArcKind::Referral).has_value());
}

TEST_CASE("apply_experience follows the EMA update rule") {
  TrustStore store("A", {0.3, 0.5});
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.8));
  TrustValue v = store.apply_experience({"B", kCtx, 0.0});
  CHECK(v.get() == (1.0 - 0.3) * 0.8 + 0.3 * 0.0);

  // first experience seeds the rating directly
  TrustValue seeded = store.apply_experience({"C", kCtx, 0.9});
  CHECK(seeded.get() == 0.9);

  // 1.0 is a fixed point
  store.record_arc(make_performance_arc("A", "D", kCtx, 1.0));
  CHECK(store.apply_experience({"D", kCtx, 1.0}).get() == 1.0);

  CHECK_THROWS(store.apply_experience({"B", kCtx, 1.5}));
}

TEST_CASE("apply_experience with outcome equal to old value changes nothing") {
  TrustStore store("A");
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.37));
  CHECK(store.apply_experience({"B", kCtx, 0.37}).get() ==
        doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("repeated unanimous reports converge monotonically") {
  TrustStore store("A", {0.3, 0.5});
  store.record_arc(make_performance_arc("A", "B", kCtx, 0.0));
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    double v = store.apply_experience({"B", kCtx, 1.0}).get();
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev >= 0.999);

  store.record_arc(make_performance_arc("A", "C", kCtx, 1.0));
  prev = 1.0;
  for (int i = 0; i < 100; ++i) {
    double v = store.apply_experience({"C", kCtx, 0.0}).get();
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev <= 0.001);
}

TEST_CASE("penalize_referee decays the referral arc multiplicatively") {
  TrustStore store("A", {0.3, 0.5});
  store.record_arc(make_referral_arc("A", "B", kCtx, 0.9));
  CHECK(store.penalize_referee("B", kCtx) == PenalizeStatus::Applied);
  CHECK(store.direct_rating("B", TrustContext::referral(kCtx),
                            ArcKind::Referral)
            ->get() == 0.9 * (1.0 - 0.5));

  store.record_arc(make_referral_arc("A", "C", kCtx, 0.0));
  CHECK(store.penalize_referee("C", kCtx) == PenalizeStatus::Applied);
  CHECK(store.direct_rating("C", TrustContext::referral(kCtx),
                            ArcKind::Referral)
            ->get() == 0.0);

  std::size_t before = store.size();
  CHECK(store.penalize_referee("Z", kCtx) == PenalizeStatus::NoReferralArc);
  CHECK(store.size() == before);
}

TEST_CASE("values stay in [0,1] under random operation sequences") {
  std::mt19937_64 rng(7);
  TrustStore store("A", {0.4, 0.7});
  const TrustContext contexts[] = {kCtx, TrustContext::maintain_privacy()};
  const EntityId peers[] = {"B", "C", "D"};
  for (int i = 0; i < 2000; ++i) {
    const EntityId& peer = peers[rng() % 3];
    const TrustContext& ctx = contexts[rng() % 2];
    double v = static_cast<double>(rng() % 1001) / 1000.0;
    switch (rng() % 4) {
      case 0: store.record_arc(make_performance_arc("A", peer, ctx, v)); break;
      case 1: store.record_arc(make_referral_arc("A", peer, ctx, v)); break;
      case 2: store.apply_experience({peer, ctx, v}); break;
      case 3: store.penalize_referee(peer, ctx); break;
    }
    for (const auto& [key, arc] : store.arcs()) {
      CHECK(arc.value.get() >= 0.0);
      CHECK(arc.value.get() <= 1.0);
    }
  }
}

TEST_CASE("trust values reject out-of-range construction") {
  CHECK_THROWS(TrustValue(-0.01));
  CHECK_THROWS(TrustValue(1.01));
  CHECK(TrustValue::clamped(1.7).get() == 1.0);
  CHECK(TrustValue::clamped(-0.4).get() == 0.0);
}

TEST_CASE("referral contexts cannot nest") {
  TrustContext r = TrustContext::referral(kCtx);
  CHECK_THROWS(TrustContext::referral(r));
  CHECK(r.referral_target() == kCtx);
  CHECK(TrustContext::parse(r.token()) == r);
}
