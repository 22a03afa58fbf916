#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustweave/trust_store.hpp"

namespace trustweave {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

/// A global view of trust arcs, as loaded from a graph file. Arc order is
/// canonical (sorted by key) so serialization is byte-stable.
class TrustGraph {
 public:
  void add(TrustArc arc) {
    arc.check();
    auto key = arc.key();
    auto it = std::find_if(arcs_.begin(), arcs_.end(),
                           [&](const TrustArc& a) { return a.key() == key; });
    if (it != arcs_.end())
      *it = std::move(arc);
    else
      arcs_.push_back(std::move(arc));
    std::sort(arcs_.begin(), arcs_.end(),
              [](const TrustArc& a, const TrustArc& b) { return a.key() < b.key(); });
  }

  const std::vector<TrustArc>& arcs() const { return arcs_; }
  bool empty() const { return arcs_.empty(); }

  std::set<EntityId> entities() const {
    std::set<EntityId> ids;
    for (const auto& a : arcs_) {
      ids.insert(a.trustor);
      ids.insert(a.trustee);
    }
    return ids;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& a : arcs_) out += a.canonical_line() + "\n";
    return out;
  }

  /// Parses the line-oriented graph format:
  ///   arc <trustor> <trustee> <context> <performance|referral[:target]> <value>
  /// `#` begins a comment, blank lines are skipped.
  static TrustGraph parse(std::istream& in) {
    TrustGraph g;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string word;
      std::vector<std::string> words;
      while (ls >> word) words.push_back(word);
      if (words.empty()) continue;
      if (words[0] != "arc")
        throw ParseError(line_no, "expected `arc`, got `" + words[0] + "`");
      if (words.size() != 6)
        throw ParseError(line_no, "expected 6 fields, got " +
                                      std::to_string(words.size()));
      try {
        g.add(parse_arc_fields(words[1], words[2], words[3], words[4], words[5]));
      } catch (const std::exception& e) {
        throw ParseError(line_no, e.what());
      }
    }
    return g;
  }

  static TrustGraph parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static TrustGraph load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return parse(in);
  }

  static TrustArc parse_arc_fields(const std::string& trustor,
                                   const std::string& trustee,
                                   const std::string& context_tok,
                                   const std::string& kind_tok,
                                   const std::string& value_tok) {
    TrustContext ctx = TrustContext::parse(context_tok);
    double value = parse_value(value_tok);
    if (kind_tok == "performance")
      return make_performance_arc(trustor, trustee, ctx, value);
    if (kind_tok == "referral")
      return make_referral_arc(trustor, trustee, ctx, value);
    if (kind_tok.rfind("referral:", 0) == 0) {
      TrustContext target = TrustContext::parse(kind_tok.substr(9));
      if (!(target == ctx))
        throw std::invalid_argument(
            "referral target context disagrees with context field (cross-context "
            "referrals are not supported)");
      return make_referral_arc(trustor, trustee, target, value);
    }
    throw std::invalid_argument("unknown arc kind: " + kind_tok);
  }

  static double parse_value(const std::string& tok) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad decimal value: " + tok);
    }
    if (pos != tok.size()) throw std::invalid_argument("bad decimal value: " + tok);
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("value outside [0,1]: " + tok);
    return v;
  }

 private:
  std::vector<TrustArc> arcs_;
};

}  // namespace trustweave
