// blowup: batch front-end over the blowup library.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blowup/errors.hpp"
#include "blowup/version.hpp"
#include "commands.hpp"
#include "log.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 3;

struct Flags {
    std::string config_path;
    std::string seed;
    std::string out_dir = ".";
    std::string method;
    std::string hint;
    std::string tol;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "RNG seed (stochastic routes)");
    sub->add_option("--out", f.out_dir, "Output directory");
    sub->add_option("--method", f.method, "Distribution route")
        ->check(CLI::IsMember({"analytic", "mc", "pde", "all"}));
    sub->add_option("--hint-tail-exponent", f.hint, "Tail exponent p of 1/b ~ x^-p (or of 1/sigma)");
    sub->add_option("--tol", f.tol, "Agreement tolerance for cross-route comparisons");
    sub->add_option("--set", f.sets, "Extra KEY=VALUE override (repeatable)");
}

cli::Context build_context(const Flags& f) {
    cli::Context ctx;
    if (!f.config_path.empty()) ctx.config = cli::Config::from_file(f.config_path);
    cli::Config over;
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw cli::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        over.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!f.seed.empty()) over.set("seed", f.seed);
    if (!f.method.empty()) over.set("method", f.method);
    if (!f.hint.empty()) over.set("tail_exponent_hint", f.hint);
    if (!f.tol.empty()) over.set("tol", f.tol);
    ctx.config.merge(over);
    ctx.out_dir = f.out_dir;
    cli::debug("effective config (hash " + ctx.config.hash() + "):\n" + ctx.config.canonical());
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time blow-up verdicts, explosion-time distributions and simulations"};
    app.set_version_flag("--version", std::string(blowup::library_version()));
    app.require_subcommand(1);

    Flags flags;
    const std::map<std::string, std::pair<std::string, std::function<int(const cli::Context&)>>> commands = {
        {"verdict", {"Decide finite-time explosion", cli::cmd_verdict}},
        {"dist", {"Explosion-time distribution by one or more routes", cli::cmd_dist}},
        {"laplace", {"Laplace transform of the explosion time", cli::cmd_laplace}},
        {"simulate", {"Monte Carlo explosion-time samples", cli::cmd_simulate}},
        {"h4check", {"Check the Wiener-noise growth condition on f", cli::cmd_h4check}},
        {"odetime", {"Explosion time of the deterministic equation", cli::cmd_odetime}},
    };
    std::map<CLI::App*, std::string> names;
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        add_common(sub, flags);
        names[sub] = name;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const std::string name = names.at(app.get_subcommands().front());
    try {
        const auto ctx = build_context(flags);
        return commands.at(name).second(ctx);
    } catch (const cli::ConfigError& e) {
        cli::log(cli::Level::Error, e.what());
        return kUsage;
    } catch (const blowup::ParseError& e) {
        cli::log(cli::Level::Error, std::string("expression: ") + e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        cli::log(cli::Level::Error, e.what());
        return kUsage;
    } catch (const blowup::Error& e) {
        cli::log(cli::Level::Error, e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        cli::log(cli::Level::Error, e.what());
        return kNumerical;
    }
}
