#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <tuple>

namespace trustweave {

/// The scope in which a trust rating is meaningful. A Referral context is
/// always parameterised by exactly one non-referral target context; nesting
/// Referral inside Referral is rejected.
class TrustContext {
 public:
  enum class Tag {
    IdentityProvision,
    SelfAssertionResponsibility,
    MakeGoodAssertions,
    MaintainPrivacy,
    GoodIntentions,
    Custom,
    Referral,
  };

  TrustContext() = default;

  static TrustContext identity_provision() { return TrustContext(Tag::IdentityProvision); }
  static TrustContext self_assertion_responsibility() {
    return TrustContext(Tag::SelfAssertionResponsibility);
  }
  static TrustContext make_good_assertions() { return TrustContext(Tag::MakeGoodAssertions); }
  static TrustContext maintain_privacy() { return TrustContext(Tag::MaintainPrivacy); }
  static TrustContext good_intentions() { return TrustContext(Tag::GoodIntentions); }

  static TrustContext custom(std::string label) {
    if (label.empty()) throw std::invalid_argument("custom context needs a label");
    TrustContext c(Tag::Custom);
    c.label_ = std::move(label);
    return c;
  }

  static TrustContext referral(const TrustContext& target) {
    if (target.is_referral())
      throw std::invalid_argument("referral context cannot target a referral context");
    TrustContext c(Tag::Referral);
    c.target_tag_ = target.tag_;
    c.target_label_ = target.label_;
    return c;
  }

  Tag tag() const { return tag_; }
  bool is_referral() const { return tag_ == Tag::Referral; }

  TrustContext referral_target() const {
    if (!is_referral()) throw std::logic_error("not a referral context");
    TrustContext c(target_tag_);
    c.label_ = target_label_;
    return c;
  }

  /// Token form used in graph files, reports and DOT labels, e.g.
  /// `make-good-assertions` or `custom:billing`. Referral contexts render
  /// as `referral:<target>`.
  std::string token() const {
    switch (tag_) {
      case Tag::IdentityProvision: return "identity-provision";
      case Tag::SelfAssertionResponsibility: return "self-assertion-responsibility";
      case Tag::MakeGoodAssertions: return "make-good-assertions";
      case Tag::MaintainPrivacy: return "maintain-privacy";
      case Tag::GoodIntentions: return "good-intentions";
      case Tag::Custom: return "custom:" + label_;
      case Tag::Referral: return "referral:" + referral_target().token();
    }
    return "?";
  }

  static TrustContext parse(const std::string& token) {
    if (token == "identity-provision") return identity_provision();
    if (token == "self-assertion-responsibility") return self_assertion_responsibility();
    if (token == "make-good-assertions") return make_good_assertions();
    if (token == "maintain-privacy") return maintain_privacy();
    if (token == "good-intentions") return good_intentions();
    if (token.rfind("custom:", 0) == 0) return custom(token.substr(7));
    if (token.rfind("referral:", 0) == 0) return referral(parse(token.substr(9)));
    throw std::invalid_argument("unknown trust context: " + token);
  }

  auto operator<=>(const TrustContext&) const = default;

 private:
  explicit TrustContext(Tag t) : tag_(t) {}

  Tag tag_ = Tag::IdentityProvision;
  std::string label_;
  Tag target_tag_ = Tag::IdentityProvision;  // only meaningful for Referral
  std::string target_label_;
};

}  // namespace trustweave
