#include "fzkit/pipeline.hpp"

#include <algorithm>
#include <set>

namespace fzkit {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::LoxodromicCandidate: return "LoxodromicCandidate";
    case Verdict::EllipticProven: return "EllipticProven";
    case Verdict::BoundedOrbitEvidence: return "BoundedOrbitEvidence";
    default: return "Inconclusive";
  }
}

std::vector<StratumSummary> summarize(const GraphSelfMap& f, const Stratification& s) {
  std::vector<StratumSummary> out;
  for (std::size_t i = 0; i < s.strata.size(); ++i) {
    StratumSummary sum;
    sum.index = static_cast<int>(i);
    sum.kind = s.strata[i].kind;
    sum.lambda = s.strata[i].lambda;
    for (int e : s.strata[i].edges) sum.edges.push_back(f.graph().edge_name(oriented(e)));
    out.push_back(std::move(sum));
  }
  return out;
}

SplittingSearch find_invariant_splitting(const FreeAutomorphism& phi, const std::vector<OneEdgeSplitting>& supplied,
                                         const PipelineCaps& caps, const FixedClassSearch* known) {
  SplittingSearch out;
  std::set<std::string> seen;
  auto attempt = [&](const OneEdgeSplitting& sp) {
    if (!seen.insert(sp.canonical()).second) return false;
    ++out.candidates;
    if (auto inv = invariant_splitting_search(phi, sp, caps.filling.splitting_power)) {
      out.found = inv;
      return true;
    }
    return false;
  };
  for (const auto& sp : supplied) {
    try {
      sp.validate();
    } catch (const PreconditionFailed& e) {
      out.notes.push_back(std::string("supplied splitting skipped: ") + e.what());
      continue;
    }
    if (attempt(sp)) return out;
  }

  auto from_classes = [&](const FixedClassSearch& fc) {
    std::vector<CyclicWord> roots;
    for (const auto& c : fc.classes) {
      CyclicWord u = c.word.root().first.unoriented();
      if (std::find(roots.begin(), roots.end(), u) == roots.end()) roots.push_back(u);
      if (roots.size() == caps.filling.seed_classes) break;
    }
    for (const auto& r : roots)
      for (const auto& sp : seeds_from_class(r, phi.rank()))
        if (attempt(sp)) return true;
    return false;
  };

  const FillingCaps& fc = caps.filling;
  int probe = std::min(caps.probe_length, fc.fixed_length);
  out.lengths.push_back(probe);
  if (from_classes(fixed_class_search(phi, probe, fc.fixed_power, fc.fixed_nodes))) return out;
  if (probe >= fc.fixed_length) return out;
  out.lengths.push_back(fc.fixed_length);
  if (known && known->length_cap == fc.fixed_length && known->power_cap == fc.fixed_power) {
    from_classes(*known);
  } else {
    auto full = fixed_class_search(phi, fc.fixed_length, fc.fixed_power, fc.fixed_nodes);
    if (!full.complete) out.notes.push_back("fixed-class search stopped at its node budget");
    from_classes(full);
  }
  return out;
}

bool reverify(const FreeAutomorphism& phi, const InvariantSplitting& s) {
  return equivalent(apply_aut(s.splitting, power(phi, s.power)), s.splitting);
}

ClassificationReport classify(const GraphSelfMap& f, const PipelineCaps& caps,
                              const std::vector<OneEdgeSplitting>& splittings) {
  if (f.graph().rank() < 3) throw PreconditionFailed("classification needs rank at least 3");
  ClassificationReport rep;
  rep.caps = caps;
  rep.input = f.serialize();
  rep.rank = f.graph().rank();
  Stratification s;
  try {
    s = compute_stratification(f);
  } catch (const UnclassifiableStratum& e) {
    throw NotARepresentative(e.what());
  }
  rep.strata = summarize(f, s);
  FreeAutomorphism phi = f.induced_automorphism();

  rep.filling = filling_report(f, phi, splittings, caps.filling);
  for (const auto& vg : rep.filling.vertex_groups)
    if (vg.invariant_power && !rep.splitting.found) rep.splitting.found = InvariantSplitting{*vg.invariant_power, vg.splitting};
  if (!rep.splitting.found) {
    const FixedClassSearch* known = rep.filling.fixed.length_cap > 0 ? &rep.filling.fixed : nullptr;
    rep.splitting = find_invariant_splitting(phi, splittings, caps, known);
  }

  try {
    auto d = disintegration_rank(f, caps.disintegration);
    rep.disintegration_rank = d.rank;
    rep.disintegration_status = d.status;
  } catch (const Error&) {
    rep.disintegration_status = Status::unknown;
  }

  const auto& fill = rep.filling;
  if (rep.splitting.found) {
    rep.reverified = reverify(phi, *rep.splitting.found);
    if (rep.reverified) {
      rep.verdict = Verdict::EllipticProven;
      rep.reason = "phi^" + std::to_string(rep.splitting.found->power) + " fixes a " +
                   to_string(rep.splitting.found->splitting.tag()) + " splitting";
      return rep;
    }
    rep.reason = "invariant splitting failed re-verification";
  }
  if (fill.overall == FillingVerdict::NotFilling || fill.overall == FillingVerdict::NotZFilling) {
    rep.verdict = Verdict::BoundedOrbitEvidence;
    rep.reason = std::string(to_string(fill.overall)) + ": " + fill.witness;
    return rep;
  }
  if (fill.overall == FillingVerdict::ZFillingEvidence && fill.closed_inps.empty() && fill.fixed.classes.empty() &&
      fill.fixed.complete) {
    rep.verdict = Verdict::LoxodromicCandidate;
    rep.reason = "filling leaf, no periodic class up to length " + std::to_string(fill.fixed.length_cap) +
                 " and no closed Nielsen loop";
    return rep;
  }
  rep.verdict = Verdict::Inconclusive;
  std::vector<std::string> why;
  if (fill.overall == FillingVerdict::Inconclusive) why.push_back("free factor test inconclusive");
  if (!fill.fixed.classes.empty())
    why.push_back(std::to_string(fill.fixed.classes.size()) + " periodic classes and no invariant splitting among their seeds");
  if (!fill.closed_inps.empty()) why.push_back(std::to_string(fill.closed_inps.size()) + " closed Nielsen loops");
  if (!fill.fixed.complete) why.push_back("fixed-class search incomplete");
  for (std::size_t i = 0; i < why.size(); ++i) rep.reason += (i ? "; " : "") + why[i];
  return rep;
}

CentralizerReport centralizer_probe(const GraphSelfMap& f, const PipelineCaps& caps,
                                    const std::vector<OneEdgeSplitting>& splittings) {
  CentralizerReport rep;
  FreeAutomorphism phi = f.induced_automorphism();
  try {
    auto d = disintegration_rank(f, caps.disintegration);
    rep.disintegration_rank = d.rank;
    rep.disintegration_status = d.status;
  } catch (const Error& e) {
    rep.notes.push_back(std::string("disintegration failed: ") + e.what());
  }
  if (is_inner(phi)) {
    rep.trivial = true;
    rep.notes.push_back("phi is inner, so every twist commutes with it in Out(F)");
    return rep;
  }
  auto search = find_invariant_splitting(phi, splittings, caps);
  for (const auto& n : search.notes) rep.notes.push_back(n);
  if (!search.found) {
    rep.notes.push_back("no invariant splitting found, so no commuting twist");
    if (rep.disintegration_rank == 1) rep.notes.push_back("disintegration rank 1 fits a virtually cyclic centralizer");
    return rep;
  }
  rep.splitting = search.found;
  try {
    FreeAutomorphism d = dehn_twist(search.found->splitting);
    FreeAutomorphism pk = power(phi, search.found->power);
    FreeAutomorphism comm = compose(compose(d, pk), compose(invert(d), invert(pk)));
    rep.twist = d;
    rep.conjugator = is_inner(comm);
    if (!rep.conjugator) rep.notes.push_back("the twist does not commute with phi^" + std::to_string(search.found->power));
  } catch (const PreconditionFailed& e) {
    rep.notes.push_back(std::string("no twist: ") + e.what());
  }
  return rep;
}

}  // namespace fzkit
