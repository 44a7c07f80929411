#include <alpods/alpods.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* app, alpods::CommonOptions& o)
{
    app->add_option("--config", o.config_path, "JSON run configuration");
    app->add_option("--seed", o.seed, "random seed (overrides the config file)");
    app->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Explainable classification of cases of events by interval-rule populations"};
    app.require_subcommand(1);

    alpods::GenIrisOptions gen_iris;
    auto* gi = app.add_subcommand("gen-iris", "write jittered Iris train/test CSVs");
    gi->add_option("--seed", gen_iris.seed);
    gi->add_option("--out", gen_iris.out_dir, "output directory");

    alpods::GenSyntheticOptions gen_syn;
    auto* gs = app.add_subcommand("gen-synthetic", "write a synthetic benchmark CSV");
    gs->add_option("--kind", gen_syn.kind, "planted or mixture")->check(CLI::IsMember({"planted", "mixture"}));
    gs->add_option("--seed", gen_syn.seed);
    gs->add_option("--out", gen_syn.out_dir, "output directory");
    gs->add_option("--events", gen_syn.events, "events per case (planted) or in total (mixture)");
    gs->add_option("--cases-per-class", gen_syn.cases_per_class);

    alpods::TrainOptions train;
    auto* tr = app.add_subcommand("train", "grow the DAG, select populations and write a model bundle");
    add_common(tr, train.common);
    tr->add_option("--data", train.data_path, "training CSV")->required();
    tr->add_option("--out", train.bundle_path, "bundle path (.json)")->required();
    tr->add_option("--per-class-events", train.per_class_events, "balanced sample size per class");

    alpods::ClassifyOptions classify;
    auto* cl = app.add_subcommand("classify", "label every case of a CSV with a trained bundle");
    add_common(cl, classify.common);
    cl->add_option("--bundle", classify.bundle_path)->required();
    cl->add_option("--data", classify.data_path)->required();
    cl->add_flag("--explain", classify.explain, "print pro/contra terms with degrees");
    cl->add_flag("--json", classify.json, "emit JSON records");

    alpods::VisPanelOptions vis;
    auto* vp = app.add_subcommand("vispanel", "render the ProbDiff-selected scatter panel of a population");
    add_common(vp, vis.common);
    vp->add_option("--bundle", vis.bundle_path)->required();
    vp->add_option("--data", vis.data_path)->required();
    vp->add_option("--population", vis.population)->required();
    vp->add_option("--out", vis.out_dir, "output directory");
    vp->add_option("--pairs", vis.pairs, "explicit marker pairs, e.g. FS,SS")->delimiter(',');
    vp->add_option("--max-plots", vis.max_plots);
    vp->add_option("--bins", vis.bins, "SDH bins per axis");

    alpods::BenchIrisOptions bench;
    auto* bi = app.add_subcommand("bench-iris", "cross-validate on jittered Iris against the acceptance thresholds");
    add_common(bi, bench.common);
    bi->add_option("--rounds", bench.rounds)->check(CLI::PositiveNumber);
    bi->add_option("--json", bench.json_path, "write the report as JSON");
    bi->add_flag("--record-timing", bench.record_timing, "include wall-clock seconds in the JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? alpods::kExitOk : alpods::kExitValidation;
    }

    return alpods::guarded(std::cerr, [&]() -> int {
        if (*gi) {
            return alpods::cmd_gen_iris(gen_iris, std::cout);
        }
        if (*gs) {
            return alpods::cmd_gen_synthetic(gen_syn, std::cout);
        }
        if (*tr) {
            return alpods::cmd_train(train, std::cout);
        }
        if (*cl) {
            return alpods::cmd_classify(classify, std::cout, std::cerr);
        }
        if (*vp) {
            return alpods::cmd_vispanel(vis, std::cout);
        }
        return alpods::cmd_bench_iris(bench, std::cout);
    });
}
