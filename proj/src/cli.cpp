#include "kgbayes/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kgbayes/dataset.hpp"
#include "kgbayes/em.hpp"
#include "kgbayes/errors.hpp"
#include "kgbayes/eval.hpp"
#include "kgbayes/kg_encoder.hpp"
#include "kgbayes/mbnb.hpp"
#include "kgbayes/mixture_hbm.hpp"
#include "kgbayes/model_io.hpp"
#include "kgbayes/rules.hpp"

namespace kgbayes::cli {

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Options {
    std::string input;
    std::string data;
    std::string output;
    std::string model = "mbnb";
    std::string variant = "pipeline";
    std::string impute = "marginalize";
    std::string models_list = "mbnb,mbnb-em,hbm";
    std::string trace_path;
    std::string target = "C";
    double alpha = 1.0;
    double theta = 0.9;
    double theta_decision = 0.5;
    double cutoff = 0.0;
    bool cutoff_given = false;
    double prior = 0.0;  // 0: per-column known-True frequency
    double tol = 1e-6;
    int max_iter = 200;
    int components = 0;
    int restarts = 10;
    int folds = 10;
    int problems = 10;
    int min_pos = 10;
    int min_neg = 10;
    std::uint64_t seed = 42;
    bool simplified = false;
    bool no_phase2 = false;
};

EmConfig em_config(const Options& o) { return EmConfig{o.tol, o.max_iter, o.seed}; }

int cmd_encode(const Options& o) {
    KnowledgeBase kb = parse_kb_file(o.input);
    std::vector<Feature> feats = generate_features(kb);
    Dataset ds = encode_individuals(kb, feats);
    if (o.cutoff_given) ds = variance_select(ds, o.cutoff);
    save_csv_file(ds, o.output);
    return 0;
}

AnyModel fit_model(const Options& o, const Dataset& ds) {
    EmConfig cfg = em_config(o);
    if (o.model == "mbnb") {
        std::vector<int> labeled;
        for (std::size_t t = 0; t < ds.rows(); ++t)
            if (ds.has_labels() && is_known((*ds.y)[t])) labeled.push_back(static_cast<int>(t));
        Dataset sub = select_rows(ds, labeled);
        if (o.impute == "constant") {
            Dataset src = o.prior == 0.0 ? sub : with_fixed_priors(sub, o.prior);
            return fit_mle_soft(impute_constant(src), *src.y, feature_names(src), o.alpha);
        }
        if (o.impute == "em")  // complete missing inputs by EM, keep the fit
            return fit_mbnb_em(ds, o.alpha, cfg, false);
        if (o.impute == "mixture") {  // mixture-complete inputs, then fit the top tier
            int k = o.components > 0 ? o.components
                                     : select_k(ds, {2, 3, 4, 5, 6, 7, 8, 9, 10}, o.restarts, cfg)
                                           .best_k;
            return fit_hbm(ds, k, o.restarts, o.alpha, cfg, HbmVariant::Pipeline).top;
        }
        if (o.impute != "marginalize")
            throw DataError("unknown imputation strategy '" + o.impute + "'");
        return fit_mle(sub, o.alpha);
    }
    if (o.model == "mbnb-em") return fit_mbnb_em(ds, o.alpha, cfg, !o.no_phase2);
    if (o.model == "hbm") {
        int k = o.components > 0 ? o.components : select_k(ds, {2, 3, 4, 5, 6, 7, 8, 9, 10},
                                                           o.restarts, cfg)
                                                      .best_k;
        HbmVariant variant = o.variant == "class-conditional" ? HbmVariant::ClassConditional
                                                              : HbmVariant::Pipeline;
        return fit_hbm(ds, k, o.restarts, o.alpha, cfg, variant);
    }
    if (o.model == "mixture") {
        int k = o.components > 0 ? o.components : 2;
        return fit_mixture(ds, k, o.restarts, cfg).params;
    }
    throw DataError("unknown model kind '" + o.model + "'");
}

int cmd_fit(const Options& o) {
    Dataset ds = load_csv_file(o.input);
    AnyModel model = fit_model(o, ds);
    save_model_file(model, o.output);
    if (!o.trace_path.empty() && o.model == "mbnb-em") {
        // Re-run phase 1 on the labeled rows to export its trace.
        std::vector<int> labeled;
        for (std::size_t t = 0; t < ds.rows(); ++t)
            if (is_known((*ds.y)[t])) labeled.push_back(static_cast<int>(t));
        Dataset sub = select_rows(ds, labeled);
        Phase1Result ph1 = em_phase1(sub, fit_mle(sub, o.alpha), em_config(o));
        std::ofstream out(o.trace_path);
        if (!out) throw DataError("cannot open " + o.trace_path + " for writing");
        ph1.trace.write_csv(out);
    }
    return 0;
}

int cmd_predict(const Options& o) {
    AnyModel model = load_model_file(o.input);
    Dataset ds = load_csv_file(o.data);

    std::ofstream out(o.output);
    if (!out) throw DataError("cannot open " + o.output + " for writing");

    // Echo the input columns and append posterior/decision.
    std::ostringstream echo;
    save_csv(ds, echo);
    std::istringstream lines(echo.str());
    std::string line;
    std::getline(lines, line);
    out << line << ",posterior,decision\n";

    auto decision_token = [](Outcome oc) {
        return oc == Outcome::Positive ? "1" : oc == Outcome::Negative ? "0" : "?";
    };
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        std::getline(lines, line);
        double q;
        if (std::holds_alternative<MbnbParams>(model)) {
            q = posterior(std::get<MbnbParams>(model), ds.x[t]);
        } else if (std::holds_alternative<HbmModel>(model)) {
            q = hbm_posterior(std::get<HbmModel>(model), ds.x[t]);
        } else {
            throw DataError("predict needs a classifier model (mbnb or hbm)");
        }
        Decision d = decide(q, o.theta_decision);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", q);
        out << line << ',' << buf << ',' << decision_token(d.outcome) << '\n';
    }
    return 0;
}

int cmd_rules(const Options& o) {
    AnyModel model = load_model_file(o.input);
    std::ofstream out(o.output);
    if (!out) throw DataError("cannot open " + o.output + " for writing");
    std::string stamp = utc_timestamp();

    if (std::holds_alternative<MbnbParams>(model)) {
        const MbnbParams& m = std::get<MbnbParams>(model);
        std::string body = render(extract_axiom(m, o.target, o.theta));
        body += render(extract_rule(m, o.target, o.simplified, false));
        body += render(extract_rule(m, o.target, o.simplified, true));
        write_artifact(out, "mbnb", o.theta, stamp, body);
        return 0;
    }
    if (std::holds_alternative<HbmModel>(model)) {
        const HbmModel& h = std::get<HbmModel>(model);
        if (o.data.empty())
            throw DataError("disjunctive extraction needs --data with labeled rows");
        Dataset ds = load_csv_file(o.data);
        std::string body = render(extract_disjunctive(h, o.target, o.theta, ds));
        write_artifact(out, "hbm", o.theta, stamp, body);
        return 0;
    }
    throw DataError("rules extraction needs an mbnb or hbm model");
}

int cmd_eval(const Options& o) {
    KnowledgeBase kb = parse_kb_file(o.input);
    BenchConfig cfg;
    cfg.models.clear();
    std::istringstream ms(o.models_list);
    std::string tok;
    while (std::getline(ms, tok, ',')) {
        if (tok == "mbnb")
            cfg.models.push_back(ModelKind::Mbnb);
        else if (tok == "mbnb-em")
            cfg.models.push_back(ModelKind::MbnbEm);
        else if (tok == "hbm")
            cfg.models.push_back(ModelKind::Hbm);
        else
            throw DataError("unknown model '" + tok + "' in --models");
    }
    if (cfg.models.empty()) throw DataError("--models must name at least one model");
    cfg.folds = o.folds;
    cfg.problems = o.problems;
    cfg.min_pos = o.min_pos;
    cfg.min_neg = o.min_neg;
    cfg.seed = o.seed;
    cfg.variance_cutoff = o.cutoff;
    cfg.alpha = o.alpha;
    cfg.components = o.components;
    cfg.restarts = o.restarts;
    cfg.em = em_config(o);

    BenchReport report = run_benchmark(kb, cfg);
    report.write(o.output);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& argv) {
    CLI::App app{"Interpretable probabilistic classifiers for knowledge graphs"};
    app.require_subcommand(1);
    Options o;

    CLI::App* encode = app.add_subcommand("encode", "Encode KB individuals as a ternary CSV");
    encode->add_option("kb", o.input, "knowledge base file")->required();
    encode->add_option("-o,--output", o.output, "output CSV")->required();
    encode->add_option("--cutoff", o.cutoff, "variance selection cutoff in [0, 0.25]")
        ->each([&o](const std::string&) { o.cutoff_given = true; });

    CLI::App* fit = app.add_subcommand("fit", "Fit a model from a labeled ternary CSV");
    fit->add_option("csv", o.input, "training CSV")->required();
    fit->add_option("-o,--output", o.output, "output model file")->required();
    fit->add_option("--model", o.model, "mbnb | mbnb-em | hbm | mixture");
    fit->add_option("--alpha", o.alpha, "pseudo-count smoothing (>= 0)");
    fit->add_option("--impute", o.impute,
                    "mbnb input handling: marginalize | constant | em | mixture");
    fit->add_option("--prior", o.prior,
                    "constant imputation prior (default 0 = per-column frequency)");
    fit->add_option("--variant", o.variant, "hbm variant: pipeline | class-conditional");
    fit->add_option("-K,--components", o.components, "mixture size (0 = BIC grid 2..10)");
    fit->add_option("--restarts", o.restarts, "EM restarts");
    fit->add_option("--tol", o.tol, "EM convergence threshold");
    fit->add_option("--max-iter", o.max_iter, "EM iteration cap");
    fit->add_option("--seed", o.seed, "random seed");
    fit->add_option("--trace", o.trace_path, "write the EM trace CSV here");
    fit->add_flag("--no-phase2", o.no_phase2, "mbnb-em: skip the missing-label phase");

    CLI::App* predict = app.add_subcommand("predict", "Score a CSV with a fitted model");
    predict->add_option("model", o.input, "model file")->required();
    predict->add_option("csv", o.data, "input CSV")->required();
    predict->add_option("-o,--output", o.output, "output CSV")->required();
    predict->add_option("--theta", o.theta_decision, "rejection threshold in [0.5, 1]");

    CLI::App* rules = app.add_subcommand("rules", "Extract axioms and probabilistic rules");
    rules->add_option("model", o.input, "model file")->required();
    rules->add_option("-o,--output", o.output, "output text file")->required();
    rules->add_option("--theta", o.theta, "extraction threshold");
    rules->add_option("--target", o.target, "target class name");
    rules->add_option("--data", o.data, "labeled CSV for disjunctive link estimation");
    rules->add_flag("--simplified", o.simplified, "keep only the more probable literal");

    CLI::App* eval = app.add_subcommand("eval", "Benchmark models on random problems over a KB");
    eval->add_option("kb", o.input, "knowledge base file")->required();
    eval->add_option("-o,--output", o.output, "output directory")->required();
    eval->add_option("--models", o.models_list, "comma list: mbnb,mbnb-em,hbm");
    eval->add_option("--folds", o.folds, "cross-validation folds");
    eval->add_option("--problems", o.problems, "number of generated problems");
    eval->add_option("--min-pos", o.min_pos, "minimum positive instances per problem");
    eval->add_option("--min-neg", o.min_neg, "minimum negative instances per problem");
    eval->add_option("--seed", o.seed, "random seed");
    eval->add_option("--cutoff", o.cutoff, "variance selection cutoff");
    eval->add_option("--alpha", o.alpha, "pseudo-count smoothing");
    eval->add_option("-K,--components", o.components, "HBM mixture size (0 = BIC grid)");
    eval->add_option("--restarts", o.restarts, "EM restarts");
    eval->add_option("--tol", o.tol, "EM convergence threshold");
    eval->add_option("--max-iter", o.max_iter, "EM iteration cap");

    std::vector<std::string> args(argv.rbegin(), argv.rend());  // CLI11 wants reversed
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 1;
    }

    try {
        if (encode->parsed()) return cmd_encode(o);
        if (fit->parsed()) return cmd_fit(o);
        if (predict->parsed()) return cmd_predict(o);
        if (rules->parsed()) return cmd_rules(o);
        if (eval->parsed()) return cmd_eval(o);
        std::cerr << app.help() << std::endl;
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}

}  // namespace kgbayes::cli
