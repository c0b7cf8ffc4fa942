// Command-line front end: gen | rank | eval | adv | gradcheck.
// Every run writes a manifest next to its outputs; result files reference it
// so they stay self-describing.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfs/gradcheck.hpp"
#include "sfs/sfs.hpp"

namespace {

using sfs::json;

std::string strip_extension(const std::string& path) {
    const std::size_t slash = path.find_last_of('/');
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

std::string basename_of(const std::string& path) {
    const std::size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

struct ManifestWriter {
    std::string command;
    std::string path;
    json config = json::object();
    json inputs = json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    ManifestWriter(std::string cmd, const std::string& out_stem)
        : command(std::move(cmd)), path(out_stem + ".manifest.json") {}

    void add_input(const std::string& file) { inputs[file] = sfs::fnv1a64_file(file); }

    std::string name() const { return basename_of(path); }

    void write() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json m = {{"command", command},       {"config", config},
                  {"input_digests", inputs},  {"tool_version", sfs::kVersion},
                  {"duration_seconds", secs}, {"outputs", outputs}};
        sfs::write_file_atomic(path, m.dump(2) + "\n");
    }
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stoull(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// shared model/training option block
// ---------------------------------------------------------------------------

struct ModelOptions {
    std::string model = "mlp";  // mlp | softmax | svm
    std::string hidden = "150,100,50";
    double l2 = 0.001;
    std::size_t epochs = 100;
    std::size_t batch = 32;
    std::string optimizer = "adam";
    double lr = 1e-3;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "model family: mlp | softmax | svm")
            ->default_val(model);
        cmd->add_option("--hidden", hidden, "hidden widths, comma separated ('' for none)")
            ->default_val(hidden);
        cmd->add_option("--l2", l2, "l2 weight decay")->default_val(l2);
        cmd->add_option("--epochs", epochs)->default_val(epochs);
        cmd->add_option("--batch", batch)->default_val(batch);
        cmd->add_option("--optimizer", optimizer, "adam | sgd")->default_val(optimizer);
        cmd->add_option("--lr", lr, "learning rate")->default_val(lr);
    }

    sfs::ModelSpec spec(sfs::TaskKind task, std::size_t input_dim, std::size_t classes) const {
        sfs::ModelSpec s;
        s.input_dim = input_dim;
        s.l2_weight_decay = l2;
        if (task == sfs::TaskKind::Regression) {
            s.kind = sfs::ModelKind::MlpRegressor;
            s.output_dim = 1;
            s.hidden_layers = parse_size_list(hidden);
        } else {
            s.output_dim = classes;
            if (model == "softmax") {
                s.kind = sfs::ModelKind::SoftmaxLinear;
            } else if (model == "svm") {
                s.kind = sfs::ModelKind::LinearSvm;
            } else if (model == "mlp") {
                s.kind = sfs::ModelKind::MlpClassifier;
                s.hidden_layers = parse_size_list(hidden);
            } else {
                throw sfs::ArgumentError("unknown --model '" + model + "'");
            }
        }
        return s;
    }

    sfs::TrainConfig train_config(std::uint64_t seed) const {
        sfs::TrainConfig c;
        c.epochs = epochs;
        c.batch_size = batch;
        c.optimizer = optimizer == "sgd" ? sfs::Optimizer::Sgd : sfs::Optimizer::Adam;
        c.learning_rate = lr;
        c.seed = seed;
        return c;
    }
};

sfs::GainSpec resolve_gain(const std::string& name, double alpha, double eps,
                           const sfs::ModelSpec& model) {
    sfs::GainSpec g;
    g.alpha = alpha;
    g.epsilon = eps;
    if (name == "auto") {
        switch (model.loss_kind()) {
            case sfs::LossKind::CategoricalCrossEntropy:
                g.kind = sfs::GainKind::CrossEntropyComplement;
                break;
            case sfs::LossKind::Hinge: g.kind = sfs::GainKind::HingeLog; break;
            case sfs::LossKind::Mse: g.kind = sfs::GainKind::MseInverse; break;
        }
    } else {
        g.kind = sfs::gain_kind_from_name(name);
    }
    return g;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
    std::size_t n = 1000;
    std::size_t features = 100;
    std::size_t relevant = 10;
    std::string task = "classification";
    double noise = 0.1;
    std::uint64_t seed = 0;
    std::string out;
    std::string test_out;  // optional held-out split from the same draw
    std::size_t test_n = 0;
};

int run_gen(const GenOptions& o) {
    const sfs::TaskKind task = sfs::task_kind_from_name(o.task);
    if (o.test_out.empty() != (o.test_n == 0))
        throw sfs::ArgumentError("--test-out and --test-n go together");

    const sfs::Dataset full =
        sfs::generate_synthetic(o.n + o.test_n, o.features, o.relevant, task, o.noise, o.seed);

    const std::string stem = strip_extension(o.out);
    ManifestWriter manifest("gen", stem);
    manifest.config = {{"n", o.n},         {"features", o.features}, {"relevant", o.relevant},
                       {"task", o.task},   {"noise", o.noise},       {"seed", o.seed},
                       {"out", o.out},     {"test_out", o.test_out}, {"test_n", o.test_n}};

    const sfs::Dataset train = o.test_n ? sfs::slice_rows(full, 0, o.n) : full;
    std::ostringstream csv;
    sfs::save_dense_csv(train, csv);

    std::vector<std::size_t> relevant_indices;
    for (std::size_t j = 0; j < full.r(); ++j)
        if ((*full.relevant_mask)[j]) relevant_indices.push_back(j);
    json mask = {{"n_features", full.r()},
                 {"relevant_indices", relevant_indices},
                 {"manifest", manifest.name()}};

    const std::string mask_path = stem + ".mask.json";
    sfs::write_file_atomic(o.out, csv.str());
    sfs::write_file_atomic(mask_path, mask.dump(2) + "\n");
    manifest.outputs = {o.out, mask_path};
    if (o.test_n) {
        std::ostringstream tcsv;
        sfs::save_dense_csv(sfs::slice_rows(full, o.n, o.n + o.test_n), tcsv);
        sfs::write_file_atomic(o.test_out, tcsv.str());
        manifest.outputs.push_back(o.test_out);
    }
    manifest.write();
    std::cout << "gen: wrote " << o.out << " (" << train.n() << " x " << train.r() << ") and "
              << mask_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankOptions {
    std::string data;
    std::string target_col = "target";
    std::string task = "classification";
    double gamma = 0.0;
    double eps_stop = 1.0;
    std::size_t reps = 3;
    std::string gain = "auto";
    double alpha = 1.0;
    double gain_eps = 1e-3;
    bool balance = false;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ModelOptions model;
    std::string out;
    std::string saliency_out;
};

int run_rank(const RankOptions& o) {
    const sfs::TaskKind task = sfs::task_kind_from_name(o.task);
    sfs::Dataset ds = sfs::load_dense_csv(o.data, o.target_col, task);
    if (o.balance) ds = sfs::balance_by_replication(ds, o.seed);
    auto [std_ds, stats] = sfs::standardize(ds);

    sfs::SfsConfig cfg;
    cfg.gamma = o.gamma;
    cfg.epsilon_stop = o.eps_stop;
    cfg.reps = o.reps;
    cfg.model_spec = o.model.spec(task, ds.r(), ds.num_classes);
    cfg.train_config = o.model.train_config(o.seed);
    cfg.gain = resolve_gain(o.gain, o.alpha, o.gain_eps, cfg.model_spec);
    cfg.seed = o.seed;
    cfg.threads = o.threads;

    const sfs::Tensor y = std_ds.target_matrix();
    const sfs::FeatureRanking ranking = sfs::rank(std_ds.X, y, cfg);

    const std::string stem = strip_extension(o.out);
    ManifestWriter manifest("rank", stem);
    manifest.add_input(o.data);
    manifest.config = {{"data", o.data},   {"target_col", o.target_col},
                       {"task", o.task},   {"balance", o.balance},
                       {"sfs", sfs::to_json(cfg)}};

    json rj = sfs::ranking_to_json(ranking, cfg);
    rj["feature_names"] = ds.feature_names;
    rj["manifest"] = manifest.name();

    const std::string csv_path = stem + ".csv";
    sfs::write_file_atomic(o.out, rj.dump(2) + "\n");
    sfs::write_file_atomic(csv_path, sfs::ranking_to_csv(ranking, ds.feature_names));
    manifest.outputs = {o.out, csv_path};

    if (!o.saliency_out.empty()) {
        // one extra training on the full standardized data for the exported map
        const std::uint64_t s = sfs::derive_rank_seed(cfg.seed, ranking.history.size(), 0);
        sfs::TrainedModel model = sfs::init(cfg.model_spec, s);
        sfs::TrainConfig tc = cfg.train_config;
        tc.seed = s;
        model = sfs::train(model, std_ds.X, y, tc);
        const sfs::SaliencyMap map = sfs::compute_saliency_map(
            model, cfg.gain, std_ds.X, y, std_ds.labels, task, o.threads);
        json sj = sfs::saliency_summary_json(map, cfg.gain, cfg.model_spec);
        sj["manifest"] = manifest.name();
        sfs::write_file_atomic(o.saliency_out + ".csv",
                               sfs::saliency_to_csv(map, ds.feature_names));
        sfs::write_file_atomic(o.saliency_out + ".json", sj.dump(2) + "\n");
        manifest.outputs.push_back(o.saliency_out + ".csv");
        manifest.outputs.push_back(o.saliency_out + ".json");
    }

    manifest.write();
    std::cout << "rank: " << ranking.order.size() << " features, "
              << ranking.history.size() << " rounds -> " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string train_path;
    std::string test_path;
    std::string target_col = "target";
    std::string task = "classification";
    std::string ranking_path;
    std::string ks = "";
    std::string mask_path;
    std::uint64_t seed = 0;
    ModelOptions model;
    std::string out;
};

int run_eval(const EvalOptions& o) {
    const sfs::TaskKind task = sfs::task_kind_from_name(o.task);
    const sfs::Dataset train_ds = sfs::load_dense_csv(o.train_path, o.target_col, task);
    const sfs::Dataset test_ds = sfs::load_dense_csv(o.test_path, o.target_col, task);

    std::ifstream rin(o.ranking_path);
    if (!rin) throw sfs::IoError("cannot open '" + o.ranking_path + "'");
    json rj = json::parse(rin);
    sfs::FeatureRanking ranking;
    ranking.order = rj.at("order").get<std::vector<std::size_t>>();
    if (!ranking.is_permutation())
        throw sfs::ContractError("ranking file does not hold a permutation");

    std::vector<std::size_t> ks = parse_size_list(o.ks);
    if (ks.empty()) throw sfs::ArgumentError("--ks must list at least one feature count");
    std::set<std::size_t> uniq(ks.begin(), ks.end());
    ks.assign(uniq.begin(), uniq.end());

    const sfs::ModelSpec spec = o.model.spec(task, train_ds.r(), train_ds.num_classes);
    const sfs::TrainConfig tc = o.model.train_config(o.seed);
    const sfs::FeatureCurve curve =
        sfs::feature_curve(ranking, train_ds, test_ds, spec, tc, ks, "file:" + o.ranking_path);

    const std::string stem = strip_extension(o.out);
    ManifestWriter manifest("eval", stem);
    manifest.add_input(o.train_path);
    manifest.add_input(o.test_path);
    manifest.add_input(o.ranking_path);
    manifest.config = {{"train", o.train_path}, {"test", o.test_path},
                       {"target_col", o.target_col}, {"task", o.task},
                       {"ranking", o.ranking_path},  {"ks", ks},
                       {"model_spec", sfs::to_json(spec)},
                       {"train_config", sfs::to_json(tc)}};

    json cj = sfs::curve_to_json(curve);
    if (!o.mask_path.empty()) {
        std::ifstream min(o.mask_path);
        if (!min) throw sfs::IoError("cannot open '" + o.mask_path + "'");
        json mj = json::parse(min);
        std::vector<bool> mask(mj.at("n_features").get<std::size_t>(), false);
        for (std::size_t idx : mj.at("relevant_indices").get<std::vector<std::size_t>>())
            mask[idx] = true;
        manifest.add_input(o.mask_path);
        json prec = json::object();
        for (std::size_t k : ks)
            prec[std::to_string(k)] =
                sfs::precision_at_k(ranking, std::optional<std::vector<bool>>(mask), k);
        cj["precision_at_k"] = prec;
    }
    cj["manifest"] = manifest.name();

    const std::string csv_path = stem + ".csv";
    sfs::write_file_atomic(o.out, cj.dump(2) + "\n");
    sfs::write_file_atomic(csv_path, sfs::curve_to_csv(curve));
    manifest.outputs = {o.out, csv_path};
    manifest.write();
    std::cout << "eval: " << curve.metric << " over " << ks.size() << " feature counts -> "
              << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// adv
// ---------------------------------------------------------------------------

struct AdvOptions {
    std::string data;
    std::string target_col = "target";
    std::string samples;  // comma list; empty = all
    std::size_t target = 0;
    double threshold = 0.95;
    double step = 0.05;
    std::size_t max_iters = 500;
    std::string mode = "raw_gradient";
    std::string model_in;
    std::string model_out;
    std::uint64_t seed = 0;
    ModelOptions model;
    std::string out;
};

int run_adv(const AdvOptions& o) {
    const sfs::Dataset ds = sfs::load_dense_csv(o.data, o.target_col, sfs::TaskKind::Classification);
    auto [std_ds, stats] = sfs::standardize(ds);
    const sfs::Tensor y = std_ds.target_matrix();

    sfs::TrainedModel model;
    if (!o.model_in.empty()) {
        model = sfs::load_model(o.model_in);
        if (model.spec.input_dim != ds.r())
            throw sfs::ContractError("loaded model expects " +
                                     std::to_string(model.spec.input_dim) + " features");
    } else {
        const sfs::ModelSpec spec =
            o.model.spec(sfs::TaskKind::Classification, ds.r(), ds.num_classes);
        model = sfs::init(spec, o.seed);
        model = sfs::train(model, std_ds.X, y, o.model.train_config(o.seed));
    }
    if (!o.model_out.empty()) sfs::save_model(model, o.model_out);

    std::vector<std::size_t> indices = parse_size_list(o.samples);
    if (indices.empty())
        for (std::size_t i = 0; i < ds.n(); ++i) indices.push_back(i);

    sfs::AdversarialConfig cfg;
    cfg.target_class = o.target;
    cfg.confidence_threshold = o.threshold;
    cfg.step_size = o.step;
    cfg.max_iters = o.max_iters;
    cfg.perturbation_mode = sfs::perturb_mode_from_name(o.mode);

    const std::string stem = strip_extension(o.out);
    ManifestWriter manifest("adv", stem);
    manifest.add_input(o.data);
    if (!o.model_in.empty()) manifest.add_input(o.model_in);
    manifest.config = {{"data", o.data},
                       {"target_col", o.target_col},
                       {"target", o.target},
                       {"threshold", o.threshold},
                       {"step", o.step},
                       {"max_iters", o.max_iters},
                       {"mode", o.mode},
                       {"seed", o.seed},
                       {"model_spec", sfs::to_json(model.spec)}};

    const std::size_t r = ds.r();
    json results = json::array();
    std::size_t converged = 0;
    for (std::size_t idx : indices) {
        if (idx >= std_ds.n())
            throw sfs::ArgumentError("sample index " + std::to_string(idx) + " out of range");
        sfs::Tensor x(sfs::Shape{1, r});
        for (std::size_t j = 0; j < r; ++j) x[j] = std_ds.X.at(idx, j);
        const sfs::Tensor before_probs = sfs::predict(model, x);
        const sfs::AdversarialResult res = sfs::adversarial_perturb(model, x, cfg);
        converged += res.converged ? 1 : 0;
        std::vector<double> before(x.data().begin(), x.data().end());
        std::vector<double> after(res.x_adv.data().begin(), res.x_adv.data().end());
        results.push_back({{"index", idx},
                           {"label", std_ds.labels[idx]},
                           {"before", before},
                           {"after", after},
                           {"confidence_before", before_probs[o.target]},
                           {"confidence_after", res.final_confidence},
                           {"iters", res.iters_used},
                           {"converged", res.converged}});
    }

    json aj = {{"target", o.target},
               {"threshold", o.threshold},
               {"mode", o.mode},
               {"results", results},
               {"manifest", manifest.name()}};
    sfs::write_file_atomic(o.out, aj.dump(2) + "\n");
    manifest.outputs = {o.out};
    if (!o.model_out.empty()) manifest.outputs.push_back(o.model_out);
    manifest.write();
    std::cout << "adv: " << converged << "/" << indices.size() << " samples reached confidence "
              << o.threshold << " -> " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradcheckOptions {
    std::size_t rounds = 8;
    std::uint64_t seed = 0;
};

int run_gradcheck(const GradcheckOptions& o) {
    const sfs::GradCheckReport rep = sfs::run_gradcheck(o.rounds, o.seed);
    std::cout << "gradcheck: max relative error " << rep.max_rel_error << " over " << rep.cases
              << " cases (worst: " << rep.worst_case << ")\n";
    return rep.max_rel_error < 1e-4 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"saliency-based feature selection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file (flags win)");

    GenOptions gen_opts;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with known relevant features");
    gen->add_option("--n", gen_opts.n, "samples")->default_val(gen_opts.n);
    gen->add_option("--features", gen_opts.features)->default_val(gen_opts.features);
    gen->add_option("--relevant", gen_opts.relevant)->default_val(gen_opts.relevant);
    gen->add_option("--task", gen_opts.task, "classification | regression")
        ->default_val(gen_opts.task);
    gen->add_option("--noise", gen_opts.noise)->default_val(gen_opts.noise);
    gen->add_option("--seed", gen_opts.seed)->envname("SFS_SEED")->default_val(gen_opts.seed);
    gen->add_option("--out", gen_opts.out, "output CSV path")->required();
    gen->add_option("--test-out", gen_opts.test_out, "held-out split CSV path");
    gen->add_option("--test-n", gen_opts.test_n, "held-out sample count")
        ->default_val(gen_opts.test_n);

    RankOptions rank_opts;
    auto* rank = app.add_subcommand("rank", "rank features by saliency");
    rank->add_option("--data", rank_opts.data)->required();
    rank->add_option("--target-col", rank_opts.target_col)->default_val(rank_opts.target_col);
    rank->add_option("--task", rank_opts.task)->default_val(rank_opts.task);
    rank->add_option("--gamma", rank_opts.gamma, "fraction of alive features kept per round")
        ->default_val(rank_opts.gamma);
    rank->add_option("--eps-stop", rank_opts.eps_stop)->default_val(rank_opts.eps_stop);
    rank->add_option("--reps", rank_opts.reps)->default_val(rank_opts.reps);
    rank->add_option("--gain", rank_opts.gain,
                     "auto | cross_entropy_complement | hinge_log | mse_inverse")
        ->default_val(rank_opts.gain);
    rank->add_option("--alpha", rank_opts.alpha)->default_val(rank_opts.alpha);
    rank->add_option("--gain-eps", rank_opts.gain_eps)->default_val(rank_opts.gain_eps);
    rank->add_flag("--balance", rank_opts.balance, "replicate minority classes to balance");
    rank->add_option("--seed", rank_opts.seed)->envname("SFS_SEED")->default_val(rank_opts.seed);
    rank->add_option("--threads", rank_opts.threads)->default_val(rank_opts.threads);
    rank_opts.model.attach(rank);
    rank->add_option("--out", rank_opts.out, "ranking JSON path")->required();
    rank->add_option("--saliency-out", rank_opts.saliency_out,
                     "also export a saliency map (prefix for .csv/.json)");

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "feature-count curve and precision@k for a ranking");
    eval->add_option("--train", eval_opts.train_path)->required();
    eval->add_option("--test", eval_opts.test_path)->required();
    eval->add_option("--target-col", eval_opts.target_col)->default_val(eval_opts.target_col);
    eval->add_option("--task", eval_opts.task)->default_val(eval_opts.task);
    eval->add_option("--ranking", eval_opts.ranking_path)->required();
    eval->add_option("--ks", eval_opts.ks, "feature counts, comma separated")->required();
    eval->add_option("--mask", eval_opts.mask_path, "mask sidecar for precision@k");
    eval->add_option("--seed", eval_opts.seed)->envname("SFS_SEED")->default_val(eval_opts.seed);
    eval_opts.model.attach(eval);
    eval->add_option("--out", eval_opts.out, "curve JSON path")->required();

    AdvOptions adv_opts;
    auto* adv = app.add_subcommand("adv", "adversarial perturbation probe");
    adv->add_option("--data", adv_opts.data)->required();
    adv->add_option("--target-col", adv_opts.target_col)->default_val(adv_opts.target_col);
    adv->add_option("--samples", adv_opts.samples, "sample indices, comma separated (default all)");
    adv->add_option("--target", adv_opts.target, "target class")->required();
    adv->add_option("--threshold", adv_opts.threshold)->default_val(adv_opts.threshold);
    adv->add_option("--step", adv_opts.step)->default_val(adv_opts.step);
    adv->add_option("--max-iters", adv_opts.max_iters)->default_val(adv_opts.max_iters);
    adv->add_option("--mode", adv_opts.mode, "raw_gradient | sign_gradient")
        ->default_val(adv_opts.mode);
    adv->add_option("--model-in", adv_opts.model_in, "load a serialized model instead of training");
    adv->add_option("--model-out", adv_opts.model_out, "save the trained model");
    adv->add_option("--seed", adv_opts.seed)->envname("SFS_SEED")->default_val(adv_opts.seed);
    adv_opts.model.attach(adv);
    adv->add_option("--out", adv_opts.out, "results JSON path")->required();

    GradcheckOptions gc_opts;
    auto* gc = app.add_subcommand("gradcheck", "finite-difference audit of all gradients");
    gc->add_option("--rounds", gc_opts.rounds, "sweeps over the case catalogue")
        ->default_val(gc_opts.rounds);
    gc->add_option("--seed", gc_opts.seed)->envname("SFS_SEED")->default_val(gc_opts.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(gen)) return run_gen(gen_opts);
        if (app.got_subcommand(rank)) return run_rank(rank_opts);
        if (app.got_subcommand(eval)) return run_eval(eval_opts);
        if (app.got_subcommand(adv)) return run_adv(adv_opts);
        if (app.got_subcommand(gc)) return run_gradcheck(gc_opts);
    } catch (const sfs::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
