#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>

#include "trustweave/context.hpp"
#include "trustweave/ids.hpp"
#include "trustweave/trust_value.hpp"

namespace trustweave {

enum class ArcKind { Performance, Referral };

inline std::string kind_token(ArcKind k) {
  return k == ArcKind::Performance ? "performance" : "referral";
}

/// A directed, contextual trust edge. Referral-kind arcs always carry a
/// Referral(target) context; performance arcs carry a plain context.
struct TrustArc {
  EntityId trustor;
  EntityId trustee;
  TrustContext context;
  ArcKind kind = ArcKind::Performance;
  TrustValue value;
  Tick updated_at = 0;

  /// Throws if the arc breaks a structural invariant.
  void check() const {
    if (trustor.empty() || trustee.empty())
      throw std::invalid_argument("arc with empty entity id");
    if (trustor == trustee)
      throw std::invalid_argument("self-arc not allowed: " + trustor);
    if ((kind == ArcKind::Referral) != context.is_referral())
      throw std::invalid_argument(
          "arc kind/context mismatch: referral arcs carry referral contexts");
  }

  /// The context a path in `query_context` needs this arc to have. For a
  /// referral arc that is the referral's target context.
  TrustContext effective_context() const {
    return context.is_referral() ? context.referral_target() : context;
  }

  /// Canonical graph-file record for this arc (also the byte string that
  /// referral signatures cover). No trailing whitespace.
  std::string canonical_line() const {
    return "arc " + trustor + " " + trustee + " " +
           effective_context().token() + " " + kind_token(kind) + " " +
           format_value(value);
  }

  std::tuple<EntityId, EntityId, TrustContext, ArcKind> key() const {
    return {trustor, trustee, context, kind};
  }
};

inline TrustArc make_performance_arc(EntityId trustor, EntityId trustee,
                                     TrustContext ctx, double value,
                                     Tick at = 0) {
  TrustArc a{std::move(trustor), std::move(trustee), std::move(ctx),
             ArcKind::Performance, TrustValue(value), at};
  a.check();
  return a;
}

inline TrustArc make_referral_arc(EntityId trustor, EntityId trustee,
                                  TrustContext target, double value,
                                  Tick at = 0) {
  TrustArc a{std::move(trustor), std::move(trustee),
             TrustContext::referral(target), ArcKind::Referral,
             TrustValue(value), at};
  a.check();
  return a;
}

/// A post-interaction outcome score, 1 = fully satisfactory.
struct ExperienceReport {
  EntityId trustee;
  TrustContext context;
  double outcome = 1.0;
  std::optional<std::string> source_operation;
  Tick at = 0;
};

struct TrustUpdateParams {
  double alpha = 0.3;            // EMA weight of the newest experience
  double referee_penalty = 0.5;  // multiplicative referral decay factor
};

enum class PenalizeStatus { Applied, NoReferralArc };

/// The contextual trust arcs one entity holds as trustor, plus the update
/// rules that evolve them from experience. Single-writer; the simulation
/// drives all stores from one event loop.
class TrustStore {
 public:
  using ArcKey = std::tuple<EntityId, EntityId, TrustContext, ArcKind>;

  TrustStore() = default;
  explicit TrustStore(EntityId owner, TrustUpdateParams params = {})
      : owner_(std::move(owner)), params_(params) {
    if (!(params_.alpha > 0.0 && params_.alpha <= 1.0))
      throw std::invalid_argument("alpha must be in (0,1]");
    if (!(params_.referee_penalty > 0.0 && params_.referee_penalty <= 1.0))
      throw std::invalid_argument("refereePenalty must be in (0,1]");
  }

  const EntityId& owner() const { return owner_; }
  const TrustUpdateParams& params() const { return params_; }
  const std::map<ArcKey, TrustArc>& arcs() const { return arcs_; }
  std::size_t size() const { return arcs_.size(); }

  /// Insert or replace the arc for its (trustor,trustee,context,kind)
  /// quadruple. Last write wins.
  void record_arc(TrustArc arc, Tick now = 0) {
    arc.check();
    if (arc.trustor != owner_)
      throw std::invalid_argument("owner mismatch: arc trustor " + arc.trustor +
                                  " in store owned by " + owner_);
    arc.updated_at = now;
    arcs_[arc.key()] = std::move(arc);
  }

  std::optional<TrustValue> direct_rating(const EntityId& trustee,
                                          const TrustContext& context,
                                          ArcKind kind) const {
    auto it = arcs_.find(ArcKey{owner_, trustee, context, kind});
    if (it == arcs_.end()) return std::nullopt;
    return it->second.value;
  }

  /// EMA update of the performance arc for (trustee, context):
  /// new = (1-alpha)*old + alpha*outcome. The first experience seeds the
  /// rating directly.
  TrustValue apply_experience(const ExperienceReport& report) {
    if (!(report.outcome >= 0.0 && report.outcome <= 1.0))
      throw std::invalid_argument("experience outcome outside [0,1]");
    auto prior = direct_rating(report.trustee, report.context,
                               ArcKind::Performance);
    double updated = prior ? (1.0 - params_.alpha) * prior->get() +
                                 params_.alpha * report.outcome
                           : report.outcome;
    TrustValue v = TrustValue::clamped(updated);
    record_arc(make_performance_arc(owner_, report.trustee, report.context,
                                    v.get()),
               report.at);
    return v;
  }

  /// Multiplicative decay of the Referral(targetContext) arc toward a
  /// referee whose referral proved undeserved.
  PenalizeStatus penalize_referee(const EntityId& referee,
                                  const TrustContext& target_context,
                                  Tick now = 0) {
    TrustContext ref_ctx = TrustContext::referral(target_context);
    auto it = arcs_.find(ArcKey{owner_, referee, ref_ctx, ArcKind::Referral});
    if (it == arcs_.end()) return PenalizeStatus::NoReferralArc;
    double v = it->second.value.get() * (1.0 - params_.referee_penalty);
    it->second.value = TrustValue::clamped(v);
    it->second.updated_at = now;
    return PenalizeStatus::Applied;
  }

 private:
  EntityId owner_;
  TrustUpdateParams params_;
  std::map<ArcKey, TrustArc> arcs_;
};

}  // namespace trustweave
