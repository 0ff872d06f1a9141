#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "greflect/parallel.hpp"
#include "greflect/runner.hpp"

namespace {

struct Options {
    std::string config_file;
    std::string out_dir;
    long seed = -1;  // -1 = take from config
    int threads = 0;
};

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("GREFLECT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // hardware concurrency
}

int run(greflect::ExperimentKind kind, const Options& opt) {
    using namespace greflect;
    std::ifstream in(opt.config_file);
    if (!in) {
        std::cerr << "error: cannot open config file '" << opt.config_file << "'\n";
        return 1;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    set_thread_count(resolve_threads(opt.threads));
    try {
        ExperimentSpec spec = parse_config(buffer.str(), kind);
        if (opt.seed >= 0) spec.seed = static_cast<std::uint64_t>(opt.seed);
        const std::string out_dir =
            opt.out_dir.empty() ? "greflect_out_" + kind_name(kind) : opt.out_dir;
        run_experiment(spec, out_dir);
        std::cout << "wrote " << out_dir << "/manifest.json\n";
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const numeric_error& e) {
        std::cerr << "numeric abort: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected SDE simulation and verification under volatility uncertainty"};
    app.require_subcommand(1);

    const char* kinds[] = {"simulate", "picard",   "expectation", "capacity",
                           "check_ito", "check_bdg", "check_qv",    "compare",
                           "stability", "gheat",    "skorokhod"};

    Options opt;
    for (const char* name : kinds) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", opt.config_file, "experiment config file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--threads", opt.threads,
                        "worker threads (default: GREFLECT_THREADS or hardware)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    return run(*greflect::kind_from_name(sub), opt);
}
