// codesum: summarize code with an LLM, embed the summaries and evaluate them
// on clone detection, clustering and 2-D projection.

#include "codesum/config.hpp"
#include "codesum/llm.hpp"
#include "codesum/log.hpp"
#include "codesum/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <map>
#include <string>

namespace {

enum Exit { ok = 0, other = 1, config_error = 2, provider_error = 3, cap_exceeded = 4 };

struct Common {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    bool verbose = false;
    bool quiet = false;
};

void add_common(CLI::App& cmd, Common& common) {
    cmd.add_option("-c,--config", common.config_path, "JSON config file");
    cmd.add_flag("-v,--verbose", common.verbose, "log progress");
    cmd.add_flag("-q,--quiet", common.quiet, "log errors only");
    for (const auto& key : codesum::config_keys()) {
        const std::string name = key.key;
        cmd.add_option_function<std::string>(
               "--" + name, [&common, name](const std::string& v) { common.overrides[name] = v; }, key.help)
            ->group("Config overrides");
    }
}

codesum::PipelineConfig load(const Common& common) {
    nlohmann::json tree = common.config_path.empty() ? nlohmann::json::object()
                                                     : codesum::load_config_tree(common.config_path);
    for (const auto& [k, v] : common.overrides) {
        codesum::apply_override(tree, k, v);
    }
    return codesum::parse_config(tree);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Summarize code with an LLM and evaluate the summaries' embeddings"};
    app.require_subcommand(1);
    Common common;

    struct Stage {
        const char* name;
        const char* help;
    };
    const Stage stages[] = {
        {"summarize", "summarize every fragment (cached)"},
        {"embed", "embed the summaries"},
        {"clone", "clone detection threshold sweep"},
        {"cluster", "k-means clustering of the summary embeddings"},
        {"viz", "t-SNE projection to two dimensions"},
        {"run", "every task enabled in the config"},
    };
    for (const auto& s : stages) {
        add_common(*app.add_subcommand(s.name, s.help), common);
    }
    auto* report = app.add_subcommand("report", "re-render the reports in an output directory");
    std::string report_dir;
    report->add_option("dir", report_dir, "output directory");
    add_common(*report, common);

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    codesum::log::set_level(common.quiet     ? codesum::log::Level::error
                            : common.verbose ? codesum::log::Level::info
                                             : codesum::log::Level::warning);

    try {
        if (command == "report") {
            if (report_dir.empty()) {
                report_dir = load(common).output_dir.string();
            }
            std::cout << codesum::render_report(report_dir);
            return ok;
        }

        auto config = load(common);
        config.validate(command == "run");
        codesum::Pipeline pipeline(config);
        if (command == "summarize") {
            const auto& set = pipeline.summarize();
            std::cout << fmt::format("{} fragments, {} provider calls, {} cache hits, {} failures\n",
                                     set.stats.fragments, set.stats.calls, set.stats.hits, set.stats.failures);
        } else if (command == "embed") {
            const auto& e = pipeline.embed();
            std::cout << fmt::format("{} embeddings of dimension {} ({})\n", e.size(), e.dim(), e.provider_id());
        } else if (command == "clone") {
            pipeline.clone();
        } else if (command == "cluster") {
            pipeline.cluster();
        } else if (command == "viz") {
            pipeline.viz();
        } else {
            pipeline.run();
        }
        if (command != "summarize" && command != "embed") {
            std::cout << codesum::render_report(config.output_dir);
        }
        return ok;
    } catch (const codesum::ConfigError& e) {
        codesum::log::error(e.what());
        return config_error;
    } catch (const codesum::FailureCapExceeded& e) {
        codesum::log::error(e.what());
        return cap_exceeded;
    } catch (const codesum::ProviderError& e) {
        codesum::log::error(e.what());
        return provider_error;
    } catch (const std::exception& e) {
        codesum::log::error(e.what());
        return other;
    }
}
