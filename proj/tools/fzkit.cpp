// Command-line front end for the fzkit library.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fzkit/disintegration.hpp"
#include "fzkit/fold_path.hpp"
#include "fzkit/lamination.hpp"
#include "fzkit/pipeline.hpp"
#include "fzkit/splitting.hpp"
#include "fzkit/stallings.hpp"
#include "fzkit/train_track.hpp"

using namespace fzkit;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GraphSelfMap load_map(const std::string& path) {
  std::string text = slurp(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".gmap") return GraphSelfMap::parse(text);
  return GraphSelfMap::rose(FreeAutomorphism::parse(text));
}

std::vector<OneEdgeSplitting> load_splittings(const std::vector<std::string>& paths) {
  std::vector<OneEdgeSplitting> out;
  for (const auto& p : paths) out.push_back(OneEdgeSplitting::parse(slurp(p)));
  return out;
}

PipelineCaps load_caps(const std::string& path) {
  PipelineCaps c;
  if (path.empty()) return c;
  Json j;
  try {
    j = Json::parse(slurp(path));
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("caps file: ") + e.what());
  }
  auto& f = c.filling;
  f.fixed_length = j.value("fixed_length", f.fixed_length);
  f.fixed_power = j.value("fixed_power", f.fixed_power);
  f.fixed_nodes = j.value("fixed_nodes", f.fixed_nodes);
  f.leaf_iterate = j.value("leaf_iterate", f.leaf_iterate);
  f.leaf_length = j.value("leaf_length", f.leaf_length);
  f.splitting_power = j.value("splitting_power", f.splitting_power);
  f.seed_classes = j.value("seed_classes", f.seed_classes);
  f.whitehead.depth = j.value("whitehead_depth", f.whitehead.depth);
  f.whitehead.frontier = j.value("whitehead_frontier", f.whitehead.frontier);
  c.probe_length = j.value("probe_length", c.probe_length);
  c.disintegration.inp.depth = j.value("inp_depth", c.disintegration.inp.depth);
  return c;
}

Json caps_json(const PipelineCaps& c) {
  const auto& f = c.filling;
  return {{"fixed_length", f.fixed_length},       {"fixed_power", f.fixed_power},
          {"fixed_nodes", f.fixed_nodes},         {"leaf_iterate", f.leaf_iterate},
          {"leaf_length", f.leaf_length},         {"splitting_power", f.splitting_power},
          {"seed_classes", f.seed_classes},       {"whitehead_depth", f.whitehead.depth},
          {"whitehead_frontier", f.whitehead.frontier}, {"probe_length", c.probe_length},
          {"inp_depth", c.disintegration.inp.depth}};
}

const char* status_str(Status s) { return s == Status::pass ? "pass" : s == Status::fail ? "fail" : "unknown"; }

Json words_json(const std::vector<Word>& ws) {
  Json a = Json::array();
  for (const auto& w : ws) a.push_back(w.str());
  return a;
}

Json splitting_json(const OneEdgeSplitting& s) {
  Json j{{"variant", to_string(s.variant)}, {"rank", s.rank}, {"v1", words_json(s.v1)}};
  if (s.variant == SplitVariant::Amalgam) j["v2"] = words_json(s.v2);
  else j["stable"] = s.stable.str();
  j["edge"] = s.edge.empty() ? "1" : s.edge.str();
  j["tag"] = to_string(s.tag());
  return j;
}

Json strata_json(const GraphSelfMap& f, const Stratification& s) {
  Json a = Json::array();
  for (const auto& sum : summarize(f, s)) {
    const auto& st = s.strata[static_cast<std::size_t>(sum.index)];
    Json j{{"index", sum.index}, {"kind", to_string(sum.kind)}, {"edges", sum.edges}};
    if (st.kind == StratumKind::EG) j["lambda"] = sum.lambda;
    if (st.is_neg()) {
      j["edge"] = f.graph().edge_name(st.oriented_edge);
      j["suffix"] = f.graph().path_str(st.suffix);
    }
    if (st.kind == StratumKind::NEGLinear) {
      j["axis"] = f.graph().path_str(st.axis);
      j["exponent"] = st.exponent;
    }
    a.push_back(j);
  }
  return a;
}

Json filling_json(const GraphSelfMap& f, const FillingReport& r) {
  Json j{{"overall", to_string(r.overall)}, {"witness", r.witness}};
  if (!r.factor_basis.empty()) j["factor_basis"] = words_json(r.factor_basis);
  if (r.splitting) j["splitting"] = splitting_json(*r.splitting);
  if (r.leaf.seed_edge >= 0)
    j["leaf"] = {{"edge", f.graph().edge_name(oriented(r.leaf.seed_edge))},
                 {"iterate", r.leaf.iterate},
                 {"length", r.leaf.path.size()}};
  if (r.free_factor) j["free_factor"] = {{"kind", to_string(r.free_factor->kind)}, {"note", r.free_factor->note}};
  Json fixed{{"length_cap", r.fixed.length_cap},
             {"power_cap", r.fixed.power_cap},
             {"complete", r.fixed.complete},
             {"count", r.fixed.classes.size()}};
  Json cls = Json::array();
  for (std::size_t i = 0; i < r.fixed.classes.size() && i < 32; ++i)
    cls.push_back({{"power", r.fixed.classes[i].power}, {"word", r.fixed.classes[i].word.str()}});
  fixed["classes"] = cls;
  j["fixed_classes"] = fixed;
  Json inps = Json::array();
  for (const auto& p : r.closed_inps) inps.push_back(f.graph().path_str(p));
  j["closed_inps"] = inps;
  Json vgs = Json::array();
  for (const auto& v : r.vertex_groups) {
    Json e{{"splitting", splitting_json(v.splitting)}, {"carried", v.carried}};
    if (v.invariant_power) e["invariant_power"] = *v.invariant_power;
    vgs.push_back(e);
  }
  j["vertex_groups"] = vgs;
  j["notes"] = r.notes;
  return j;
}

// Plain rendering of a report: "key: value" lines, nested blocks indented.
void render_text(std::ostream& os, const Json& j, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  auto scalar = [](const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Json& v = it.value();
    if (v.is_object()) {
      os << pad << it.key() << ":\n";
      render_text(os, v, indent + 2);
    } else if (v.is_array()) {
      bool flat = std::all_of(v.begin(), v.end(), [](const Json& x) { return !x.is_structured(); });
      if (flat) {
        os << pad << it.key() << ":";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : " ") << scalar(v[i]);
        os << "\n";
      } else {
        os << pad << it.key() << ":\n";
        for (const auto& x : v) {
          if (!x.is_array()) os << pad << "  -\n";
          if (x.is_object()) {
            render_text(os, x, indent + 4);
          } else if (x.is_array()) {
            os << pad << "   ";
            for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : " ") << scalar(x[i]);
            os << "\n";
          } else {
            os << pad << "    " << scalar(x) << "\n";
          }
        }
      }
    } else {
      os << pad << it.key() << ": " << scalar(v) << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train tracks, laminations and cyclic splittings for free group automorphisms"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string caps_path, format = "text";
  bool use_float = false;
  app.add_option("--caps", caps_path, "JSON file of search caps");
  app.add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
  auto* exact_flag = app.add_flag("--exact", "exact arithmetic (default)");
  app.add_flag("--float", use_float, "floating point arithmetic")->excludes(exact_flag);

  std::string input;
  std::vector<std::string> split_paths;

  auto* analyze = app.add_subcommand("analyze", "classify a map");
  analyze->add_option("input", input, "file.aut or file.gmap")->required();
  analyze->add_option("--split", split_paths, "candidate .split files");

  auto* strata = app.add_subcommand("strata", "filtration and strata");
  strata->add_option("input", input)->required();

  std::string edge_name;
  int iter = 3;
  auto* leaf = app.add_subcommand("leaf", "leaf segment f^k(E)");
  leaf->add_option("input", input)->required();
  leaf->add_option("--edge", edge_name, "seed edge (default: first edge of the top EG stratum)");
  leaf->add_option("--iter", iter, "iterate k");

  auto* inp = app.add_subcommand("inp", "indivisible Nielsen paths");
  inp->add_option("input", input)->required();

  std::vector<std::string> gens, members;
  int rank = 0;
  auto* stallings = app.add_subcommand("stallings", "Stallings graph of a subgroup");
  stallings->add_option("gens", gens, "generator words")->required();
  stallings->add_option("--rank", rank, "rank of the ambient free group");
  stallings->add_option("--contains", members, "words to test for membership");

  auto* split = app.add_subcommand("split", "operations on one-edge splittings");
  split->require_subcommand(1);
  std::string split_path, fold_word;
  int side = 0;
  auto* fold = split->add_subcommand("fold", "edge fold of a free splitting");
  fold->add_option("splitting", split_path)->required();
  fold->add_option("--word", fold_word)->required();
  fold->add_option("--side", side)->check(CLI::Range(0, 1));
  auto* slide = split->add_subcommand("slide", "slide orbit of the splitting's graph of groups");
  slide->add_option("splitting", split_path)->required();
  auto* twist = split->add_subcommand("twist", "Dehn twist of a cyclic splitting");
  twist->add_option("splitting", split_path)->required();

  std::vector<std::string> words;
  int steps = 12;
  auto* foldpath = app.add_subcommand("foldpath", "the fold path T_i and its length functions");
  foldpath->add_option("input", input)->required();
  foldpath->add_option("--words", words, "test words")->delimiter(',');
  foldpath->add_option("--steps", steps, "number of steps");

  auto* disint = app.add_subcommand("disintegrate", "disintegration rank");
  disint->add_option("input", input)->required();

  auto* central = app.add_subcommand("centralizer", "centralizer probe");
  central->add_option("input", input)->required();
  central->add_option("--split", split_paths, "candidate .split files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Json out{{"schema_version", kSchemaVersion}};
  try {
    PipelineCaps caps = load_caps(caps_path);
    Arithmetic mode = use_float ? Arithmetic::Float : Arithmetic::Exact;

    if (*analyze) {
      auto f = load_map(input);
      auto rep = classify(f, caps, load_splittings(split_paths));
      out["command"] = "analyze";
      out["input"] = input;
      out["rank"] = rep.rank;
      out["verdict"] = to_string(rep.verdict);
      out["reason"] = rep.reason;
      out["strata"] = strata_json(f, compute_stratification(f));
      out["filling"] = filling_json(f, rep.filling);
      Json sj{{"candidates", rep.splitting.candidates}, {"fixed_lengths", rep.splitting.lengths}};
      if (rep.splitting.found) {
        sj["power"] = rep.splitting.found->power;
        sj["splitting"] = splitting_json(rep.splitting.found->splitting);
        sj["reverified"] = rep.reverified;
      }
      sj["notes"] = rep.splitting.notes;
      out["invariant_splitting"] = sj;
      out["disintegration"] = {{"rank", rep.disintegration_rank}, {"status", status_str(rep.disintegration_status)}};
      out["caps"] = caps_json(rep.caps);
    } else if (*strata) {
      auto f = load_map(input);
      auto s = compute_stratification(f);
      out["command"] = "strata";
      out["strata"] = strata_json(f, s);
      if (s.top_eg() >= 0 && s.top_eg() + 1 == static_cast<int>(s.strata.size())) {
        auto mu = mu_metric(f, s, mode);
        out["top_lambda"] = {{"mode", to_string(mu.mode)}, {"value", mu.lambda.str()}};
      }
    } else if (*leaf) {
      auto f = load_map(input);
      auto s = compute_stratification(f);
      int e = edge_name.empty() ? default_seed_edge(s) : edge_index(f.graph().parse_edge(edge_name));
      if (e < 0) throw PreconditionFailed("no EG stratum");
      auto seg = leaf_segment(f, s, e, iter);
      out["command"] = "leaf";
      out["edge"] = f.graph().edge_name(oriented(e));
      out["iterate"] = iter;
      out["stratum"] = seg.stratum;
      out["length"] = seg.path.size();
      out["path"] = f.graph().path_str(seg.path);
      out["word"] = f.graph().read(seg.path).str();
    } else if (*inp) {
      auto f = load_map(input);
      auto s = compute_stratification(f);
      auto r = find_inps(f, s, caps.disintegration.inp);
      out["command"] = "inp";
      out["status"] = status_str(r.status);
      Json recs = Json::array();
      for (const auto& rec : r.records)
        recs.push_back({{"path", f.graph().path_str(rec.path)},
                        {"period", rec.period},
                        {"height", rec.height},
                        {"kind", to_string(rec.kind)},
                        {"verified", f.map_path(rec.path, rec.period) == rec.path},
                        {"note", rec.note}});
      out["records"] = recs;
      out["unresolved_turns"] = r.unknown;
    } else if (*stallings) {
      std::vector<Word> ws;
      for (const auto& g : gens) ws.push_back(Word::parse(g == "1" ? "" : g));
      int n = rank;
      for (const auto& w : ws)
        for (Letter x : w.letters()) n = std::max(n, std::abs(x));
      auto core = CoreGraph::from_generators(ws, n);
      out["command"] = "stallings";
      out["ambient_rank"] = n;
      out["vertices"] = core.num_vertices();
      out["edges"] = core.num_edges();
      out["subgroup_rank"] = core.rank();
      out["basis"] = words_json(core.basis());
      out["canonical"] = core.canonical();
      Json m = Json::object();
      for (const auto& w : members) m[w] = core.contains(Word::parse(w, n));
      out["contains"] = m;
    } else if (*fold) {
      auto s = OneEdgeSplitting::parse(slurp(split_path));
      auto r = edge_fold(s, Word::parse(fold_word, s.rank), side);
      out["command"] = "split fold";
      out["splitting"] = splitting_json(r);
      out["reduced"] = r.reduced();
      out["serialized"] = r.serialize();
    } else if (*slide) {
      auto s = OneEdgeSplitting::parse(slurp(split_path));
      auto orbit = enumerate_slides(GraphOfGroups::from_splitting(s));
      out["command"] = "split slide";
      out["orbit_size"] = orbit.members.size();
      out["capped"] = orbit.capped;
      Json forms = Json::array();
      for (const auto& m : orbit.members) forms.push_back(m.canonical());
      out["members"] = forms;
    } else if (*twist) {
      auto s = OneEdgeSplitting::parse(slurp(split_path));
      auto d = dehn_twist(s);
      out["command"] = "split twist";
      out["twist"] = words_json(d.images());
    } else if (*foldpath) {
      auto f = load_map(input);
      auto setup = fold_path_setup(f, mode);
      std::vector<Word> ws;
      for (const auto& w : words) ws.push_back(Word::parse(w, f.graph().rank()));
      if (ws.empty())
        for (int g = 1; g <= f.graph().rank(); ++g) ws.push_back(Word::reduce({g}));
      out["command"] = "foldpath";
      out["mode"] = to_string(setup.mu.mode);
      if (!setup.mu.note.empty()) out["mode_note"] = setup.mu.note;
      out["lambda"] = setup.mu.lambda.str();
      Json mu = Json::object();
      for (int e = 0; e < f.graph().num_edges(); ++e)
        mu[f.graph().edge_name(oriented(e))] = setup.mu.mu[static_cast<std::size_t>(e)].str();
      out["mu"] = mu;
      Json groups = Json::array();
      for (const auto& g : setup.t0.vertex_groups) groups.push_back(words_json(g));
      out["t0_vertex_groups"] = groups;
      out["f0_audit"] = setup.f0.audit;
      out["bbt"] = setup.bbt0.value.str();
      out["time_bound"] = time_bound(setup).str();
      Json rows = Json::array();
      auto st = fold_path_start(setup, ws);
      for (int i = 0;; ++i) {
        for (std::size_t k = 0; k < ws.size(); ++k)
          rows.push_back({{"step", st.index},
                          {"word", ws[k].str()},
                          {"length", st.lengths[k].str()},
                          {"value", st.lengths[k].to_double()},
                          {"time", st.time.to_double()}});
        if (i == steps) break;
        st = fold_path_advance(setup, st);
      }
      out["table"] = rows;
    } else if (*disint) {
      auto f = load_map(input);
      auto d = disintegration_rank(f, caps.disintegration);
      out["command"] = "disintegrate";
      out["rank"] = d.rank;
      out["status"] = status_str(d.status);
      out["b_vertices"] = d.graph.vertices;
      out["b_components"] = d.graph.component;
      Json arrows = Json::array();
      for (const auto& a : d.graph.arrows)
        arrows.push_back({{"from", a.from}, {"to", a.to}, {"witness", f.graph().path_str(a.witness)}});
      out["b_arrows"] = arrows;
      Json cons = Json::array();
      for (const auto& c : d.lattice.constraints)
        cons.push_back({{"r", c.r}, {"s", c.s}, {"t", c.t}, {"di", c.di}, {"dj", c.dj}});
      out["constraints"] = cons;
      Json basis = Json::array();
      for (const auto& row : d.lattice.basis) {
        Json r = Json::array();
        for (const auto& x : row) r.push_back(x.str());
        basis.push_back(r);
      }
      out["basis"] = basis;
      out["notes"] = d.notes;
    } else if (*central) {
      auto f = load_map(input);
      auto r = centralizer_probe(f, caps, load_splittings(split_paths));
      out["command"] = "centralizer";
      out["disintegration_rank"] = r.disintegration_rank;
      out["disintegration_status"] = status_str(r.disintegration_status);
      out["trivial"] = r.trivial;
      if (r.splitting) {
        out["power"] = r.splitting->power;
        out["splitting"] = splitting_json(r.splitting->splitting);
      }
      if (r.twist) out["twist"] = words_json(r.twist->images());
      if (r.conjugator) out["commutator_conjugator"] = r.conjugator->empty() ? "1" : r.conjugator->str();
      out["notes"] = r.notes;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const AlphabetError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const AuditFailed& e) {
    std::cerr << "audit failed: " << e.what() << "\n";
    return 3;
  } catch (const NotARepresentative& e) {
    std::cerr << "audit failed: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (format == "structured") std::cout << out.dump(2) << "\n";
  else render_text(std::cout, out, 0);
  return 0;
}
