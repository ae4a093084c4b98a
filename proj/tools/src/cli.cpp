#include "cli.hpp"

#include <algorithm>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "geohealth/csv.hpp"

namespace geohealth::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"build-graph", "preprocess", "encode",    "train", "cv",
                                      "ablate",      "baselines",  "explain",   "synth"};
const std::set<std::string> kGlobalsWithValue{"--config", "--seed", "--jobs", "--out"};

struct Expanded {
  std::string command;
  std::vector<std::string> globals;   ///< global options, in order
  std::vector<std::string> sub_args;  ///< subcommand options (config first)
};

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void append_option(std::vector<std::string>& out, const std::string& key, const json& value) {
  const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
  if (value.is_boolean()) {
    if (value.get<bool>()) out.push_back(flag);
  } else if (value.is_array()) {
    std::string joined;
    for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar_text(v);
    out.insert(out.end(), {flag, joined});
  } else if (!value.is_null()) {
    out.insert(out.end(), {flag, scalar_text(value)});
  }
}

/// Config file: a run manifest ({"command", "args", "seed"}), or an object
/// with optional "command" / "seed" / "jobs" and the options either under
/// "options" or at top level.
void load_config(const std::string& path, Expanded& e, std::vector<std::string>& config_globals) {
  const json j = json::parse(csv::read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "config '" + path + "' is not a JSON object");
  if (j.contains("command")) e.command = j.at("command").get<std::string>();
  if (j.contains("seed")) config_globals.insert(config_globals.end(), {"--seed", scalar_text(j.at("seed"))});
  if (j.contains("jobs")) config_globals.insert(config_globals.end(), {"--jobs", scalar_text(j.at("jobs"))});
  if (j.contains("args") && j.at("args").is_array()) {
    for (const auto& a : j.at("args")) e.sub_args.push_back(a.get<std::string>());
    return;
  }
  const json& options = j.contains("options") ? j.at("options") : j;
  for (const auto& [key, value] : options.items()) {
    if (key == "command" || key == "seed" || key == "jobs" || key == "out" || key == "options" || key == "tool")
      continue;
    append_option(e.sub_args, key, value);
  }
}

Expanded expand(const std::vector<std::string>& args) {
  Expanded e;
  std::vector<std::string> user_globals, user_sub, config_globals;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    const auto eq = a.find('=');
    const std::string head = a.substr(0, eq);
    if (kGlobalsWithValue.count(head)) {
      std::string value;
      if (eq != std::string::npos) value = a.substr(eq + 1);
      else if (i + 1 < args.size()) value = args[++i];
      else throw Error(ErrorCode::InvalidConfig, a + " needs a value");
      if (head == "--config") config_path = value;
      else user_globals.insert(user_globals.end(), {head, value});
    } else if (e.command.empty() && kCommands.count(a)) {
      e.command = a;
    } else {
      user_sub.push_back(a);
    }
  }
  if (!config_path.empty()) {
    std::string user_command = e.command;
    load_config(config_path, e, config_globals);
    if (!user_command.empty()) e.command = user_command;
  }
  e.globals = config_globals;
  e.globals.insert(e.globals.end(), user_globals.begin(), user_globals.end());
  e.sub_args.insert(e.sub_args.end(), user_sub.begin(), user_sub.end());
  return e;
}

std::vector<std::string> parse_list(const std::string& s) { return split_list(s, ','); }

template <typename T>
std::vector<T> parse_numbers(const std::string& s) {
  std::vector<T> out;
  for (const auto& item : split_list(s, ',')) {
    const auto v = csv::parse_number(item, false);
    if (!v) throw Error(ErrorCode::InvalidConfig, "'" + item + "' is not a number");
    out.push_back(static_cast<T>(*v));
  }
  return out;
}

void add_graph_options(CLI::App* sub, GraphInputs& g, bool hops_option) {
  sub->add_option("--regions", g.regions, "Regions (GeoJSON or CSV id,x,y[,group])")->required();
  sub->add_option("--graph", g.graph, "Edge list CSV src,dst (default: build from regions)");
  sub->add_option("--method", g.method, "Graph construction: contiguity or knn");
  sub->add_option("--k", g.k, "Neighbours for knn");
  if (hops_option) sub->add_option("--graph-hops", g.graph_hops, "Expand the graph to this many hops");
}

void add_data_options(CLI::App* sub, DataArgs& d, bool hops_option = true) {
  add_graph_options(sub, d.graph, hops_option);
  sub->add_option("--features", d.features, "Node feature CSV")->required();
  sub->add_option("--targets", d.targets, "Target CSV")->required();
  sub->add_option("--outcome", d.outcome, "Outcome column in the target CSV");
}

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--arch", m.architecture, "gcn, gin, graphsage or gatv2");
  sub->add_option("--depth", m.depth);
  sub->add_option("--hidden1", m.hidden1);
  sub->add_option("--hidden2", m.hidden2);
  sub->add_option("--dropout", m.dropout);
  sub->add_option("--activation", m.activation, "relu, leaky_relu or linear");
  sub->add_option("--heads", m.heads, "GATv2 attention heads");
  sub->add_option("--lr", m.lr);
  sub->add_option("--weight-decay", m.weight_decay);
  sub->add_option("--optimizer", m.optimizer, "adam, sgd or rmsprop");
  sub->add_option("--epochs", m.epochs);
  sub->add_option("--patience", m.patience);
}

json resolved_config(const CLI::App* sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      j[name] = opt->results().back();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

int exit_code(ErrorCode code) {
  switch (error_category(code)) {
    case ErrorCategory::input: return 2;
    case ErrorCategory::numeric: return 3;
    case ErrorCategory::config: return 4;
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial graph learning for regional health outcomes", "geohealth"};
  try {
    const Expanded e = expand(args);

    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    app.add_option("--config", config_path, "JSON config or run manifest");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--jobs", jobs, "Parallel folds / trials")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory");
    app.require_subcommand(0, 1);

    BuildGraphArgs bg;
    auto* s_bg = app.add_subcommand("build-graph", "Build the region graph");
    add_graph_options(s_bg, bg.graph, false);
    s_bg->add_option("--hops", bg.graph.graph_hops, "Expand to k-hop edges");
    s_bg->add_option("--tolerance", bg.tolerance, "Coordinate tolerance for shared boundaries");

    PreprocessArgs pp;
    std::string pp_fixed_cols;
    auto* s_pp = app.add_subcommand("preprocess", "VIF selection and standardisation");
    s_pp->add_option("--features", pp.features, "Feature CSV id,<columns>")->required();
    s_pp->add_option("--regions", pp.regions, "Regions file giving the row order");
    s_pp->add_option("--fixed", pp.fixed_file, "File listing fixed control columns");
    s_pp->add_option("--fixed-columns", pp_fixed_cols, "Comma list of fixed control columns");
    s_pp->add_option("--vif-free", pp.vif_free);
    s_pp->add_option("--vif-fixed", pp.vif_fixed);
    s_pp->add_flag("--skip-vif", pp.skip_vif);
    s_pp->add_flag("--no-standardize", pp.no_standardize);

    EncodeArgs en;
    std::string en_list = "random_walk,location";
    auto* s_en = app.add_subcommand("encode", "Positional and location encodings");
    add_graph_options(s_en, en.graph, true);
    s_en->add_option("--features", en.features, "Feature CSV")->required();
    s_en->add_option("--encodings", en_list, "Comma list: laplacian, laplacian_smooth, random_walk, location, none");
    s_en->add_option("--laplacian-dim", en.laplacian_dim);
    s_en->add_option("--rw-steps", en.rw_steps);
    s_en->add_option("--location", en.location, "Location embedding CSV id,<dims>");
    s_en->add_option("--location-dim", en.location_dim, "PCA-reduce location embeddings (0 keeps all)");
    s_en->add_option("--fallback-frequencies", en.fallback_frequencies);
    s_en->add_option("--smooth-lambda", en.smooth_lambda);

    TrainArgs tr;
    auto* s_tr = app.add_subcommand("train", "Train a model on all labelled regions");
    tr.data.graph.graph_hops = 2;
    add_data_options(s_tr, tr.data);
    add_model_options(s_tr, tr.model);
    s_tr->add_option("--val-fraction", tr.val_fraction);

    CvArgs cva;
    std::string cv_groups;
    auto* s_cv = app.add_subcommand("cv", "Buffered spatial cross-validation");
    cva.data.graph.graph_hops = 2;
    add_data_options(s_cv, cva.data);
    add_model_options(s_cv, cva.model);
    s_cv->add_option("--scheme", cva.scheme, "tenfold or loocv");
    s_cv->add_option("--hops", cva.hops, "Buffer radius (default: model depth)");
    s_cv->add_option("--buffer-role", cva.buffer_role, "train or excluded");
    s_cv->add_option("--groups", cv_groups, "LOOCV groups, comma separated");
    s_cv->add_option("--search-rounds", cva.search_rounds);
    s_cv->add_option("--space", cva.space, "Search space JSON");
    s_cv->add_option("--val-fraction", cva.val_fraction);

    AblateArgs ab;
    std::string ab_arch = "gcn,gin,graphsage,gatv2", ab_graphs = "1-hop,2-hop,3-hop,knn", ab_depths = "1,2,3",
                ab_enc = "none,laplacian,random_walk,location,laplacian+random_walk,laplacian+location,random_walk+location";
    auto* s_ab = app.add_subcommand("ablate", "Greedy component ablation");
    add_data_options(s_ab, ab.data, false);
    add_model_options(s_ab, ab.model);
    s_ab->add_option("--architectures", ab_arch);
    s_ab->add_option("--graphs", ab_graphs, "1-hop, 2-hop, 3-hop, knn or knn:K");
    s_ab->add_option("--knn-k", ab.knn_k);
    s_ab->add_option("--depths", ab_depths);
    s_ab->add_option("--encodings", ab_enc, "Comma list; '+' joins encodings");
    s_ab->add_option("--laplacian-dim", ab.laplacian_dim);
    s_ab->add_option("--rw-steps", ab.rw_steps);
    s_ab->add_option("--location", ab.location);
    s_ab->add_option("--fallback-frequencies", ab.fallback_frequencies);
    s_ab->add_option("--budget", ab.budget, "Random-search rounds per cell");
    s_ab->add_option("--space", ab.space, "Search space JSON");

    BaselinesArgs bl;
    std::string bl_models = "ols,slm,gwr", bl_groups, bl_external;
    auto* s_bl = app.add_subcommand("baselines", "OLS, spatial lag and GWR baselines");
    add_data_options(s_bl, bl.data);
    s_bl->add_option("--models", bl_models);
    s_bl->add_option("--mode", bl.mode, "insample, cv or both");
    s_bl->add_option("--scheme", bl.scheme);
    s_bl->add_option("--hops", bl.hops);
    s_bl->add_option("--buffer-role", bl.buffer_role);
    s_bl->add_option("--groups", bl_groups);
    s_bl->add_option("--bandwidth", bl.bandwidth, "Fixed GWR bandwidth (0 selects by leave-one-out)");
    s_bl->add_option("--adaptive-k", bl.adaptive_k);
    s_bl->add_option("--external", bl_external, "Comma list of name=path prediction files");

    ExplainArgs ex;
    auto* s_ex = app.add_subcommand("explain", "PCA explanation of model embeddings");
    ex.data.graph.graph_hops = 2;
    add_data_options(s_ex, ex.data);
    s_ex->add_option("--model", ex.model, "Model checkpoint JSON")->required();
    s_ex->add_option("--variance", ex.variance);

    SynthArgs sy;
    std::string sy_beta = "1", sy_collinear;
    auto* s_sy = app.add_subcommand("synth", "Generate a synthetic grid dataset");
    s_sy->add_option("--synth-config", sy.config, "Synth config JSON");
    s_sy->add_option("--rows", sy.rows);
    s_sy->add_option("--cols", sy.cols);
    s_sy->add_option("--n-features", sy.n_features);
    s_sy->add_option("--passes", sy.passes);
    s_sy->add_option("--rho", sy.rho);
    s_sy->add_option("--beta", sy_beta);
    s_sy->add_flag("--nonlinear", sy.nonlinear);
    s_sy->add_option("--noise", sy.noise);
    s_sy->add_option("--collinear", sy_collinear, "Comma list of source:noise");

    std::vector<std::string> argv = e.globals;
    if (!e.command.empty()) argv.push_back(e.command);
    argv.insert(argv.end(), e.sub_args.begin(), e.sub_args.end());
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);

    CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (sub == nullptr) {
      out << app.help();
      return 4;
    }

    RunContext ctx(out_dir, e.command, e.sub_args, seed);
    ctx.set_config(resolved_config(sub));
    if (sub == s_bg) {
      cmd_build_graph(ctx, bg);
    } else if (sub == s_pp) {
      pp.fixed_columns = parse_list(pp_fixed_cols);
      cmd_preprocess(ctx, pp);
    } else if (sub == s_en) {
      en.encodings = parse_list(en_list);
      cmd_encode(ctx, en);
    } else if (sub == s_tr) {
      cmd_train(ctx, tr, jobs);
    } else if (sub == s_cv) {
      cva.groups = parse_list(cv_groups);
      cmd_cv(ctx, cva, jobs);
    } else if (sub == s_ab) {
      ab.architectures = parse_list(ab_arch);
      ab.graphs = parse_list(ab_graphs);
      ab.depths = parse_numbers<int>(ab_depths);
      ab.encodings = parse_list(ab_enc);
      cmd_ablate(ctx, ab, jobs);
    } else if (sub == s_bl) {
      bl.models = parse_list(bl_models);
      bl.groups = parse_list(bl_groups);
      bl.external = parse_list(bl_external);
      cmd_baselines(ctx, bl, jobs);
    } else if (sub == s_ex) {
      cmd_explain(ctx, ex);
    } else if (sub == s_sy) {
      sy.beta = parse_numbers<double>(sy_beta);
      sy.collinear = parse_list(sy_collinear);
      cmd_synth(ctx, sy);
    }
    ctx.finish();
    for (const auto& w : ctx.diagnostics().warnings) err << "warning: " << w << "\n";
    out << e.command << ": wrote " << ctx.manifest()["outputs"].size() << " files to " << ctx.out_dir().string()
        << "\n";
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: InvalidConfig: " << ex.what() << "\n";
    return 4;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code(ex.code());
  } catch (const nlohmann::json::exception& ex) {
    err << "error: ParseError: " << ex.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& ex) {
    err << "error: InvalidConfig: " << ex.what() << "\n";
    return 4;
  } catch (const std::exception& ex) {
    err << "error: Internal: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace geohealth::cli
