#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whlab/harness.hpp"

namespace {

int resolve_threads(const std::optional<int>& cli) {
    if (cli) return *cli;
    const char* env = std::getenv("WHLAB_THREADS");
    if (!env || !*env) return 0;
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || v < 0 || v > 4096)
        throw whlab::ConfigError("WHLAB_THREADS: not a valid thread count");
    return static_cast<int>(v);
}

std::string one_line(std::string s) {
    for (std::size_t i = s.size(); i-- > 0;)
        if (s[i] == '\n') s.replace(i, 1, i + 1 == s.size() ? "" : "; ");
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact small-size holographic teleportation and spectrum experiments"};
    app.set_version_flag("--version", whlab::version_string);
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "print the experiment registry and its defaults");

    struct Request {
        std::string name;
        std::string config;
        std::string out = "out";
        std::optional<std::uint64_t> seed;
        std::optional<int> threads;
        bool active = false;
    };
    std::vector<std::shared_ptr<Request>> requests;
    for (const auto& e : whlab::experiment_registry()) {
        auto req = std::make_shared<Request>();
        req->name = e.name;
        auto* sub = app.add_subcommand(e.name, e.what);
        sub->add_option("--config", req->config, "flat TOML config file")->required();
        sub->add_option("--out", req->out, "output root directory (default: out)");
        sub->add_option("--seed", req->seed, "override the config's master seed");
        sub->add_option("--threads", req->threads,
                        "worker threads; 0 picks hardware concurrency (env: WHLAB_THREADS)");
        sub->callback([req] { req->active = true; });
        requests.push_back(std::move(req));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& e : whlab::experiment_registry()) {
            whlab::ConfigMap defaults(e.defaults.begin(), e.defaults.end());
            std::cout << e.name << "\n  " << e.what << "\n  full-scale reference: "
                      << e.reference_scale << "\n  defaults: "
                      << one_line(whlab::serialize_config(defaults)) << "\n";
        }
        return 0;
    }

    for (const auto& req : requests) {
        if (!req->active) continue;
        try {
            whlab::RunOptions opt;
            opt.out_dir = req->out;
            opt.seed = req->seed;
            opt.threads = resolve_threads(req->threads);
            const whlab::RunPaths paths =
                whlab::run_experiment_file(req->name, req->config, opt);
            std::cout << paths.dir << "\n";
            return 0;
        } catch (const std::invalid_argument& err) {
            std::cerr << "config error: " << err.what() << "\n";
            return 2;
        } catch (const std::exception& err) {
            std::cerr << "error: " << err.what() << "\n";
            return 3;
        }
    }
    return 2;
}
