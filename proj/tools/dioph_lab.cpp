// Command-line front end. Everything numeric happens behind the C API of
// dioph_core; this file only parses arguments, moves JSON/CSV text around,
// and maps statuses to exit codes (0 ok, 2 usage, 3 precision, 4 condition
// failure, 5 I/O).

#include "dioph_lab.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitPrecision = 3;
constexpr int kExitCondition = 4;
constexpr int kExitIo = 5;

int exit_of(dioph_status st) {
    switch (st) {
        case DIOPH_OK: return kExitOk;
        case DIOPH_ERR_ARGUMENT: return kExitUsage;
        case DIOPH_ERR_BUDGET: return kExitUsage;
        case DIOPH_ERR_PRECISION: return kExitPrecision;
        default: return kExitCondition;
    }
}

void report_error(const std::string& where) {
    std::cerr << "dioph-lab: " << where << ": " << dioph_last_error() << "\n";
}

// "0.4,0.5" or "0.34:0.9:0.02" (inclusive grid), mixable by commas.
std::vector<double> parse_lambda_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        auto c1 = tok.find(':');
        if (c1 == std::string::npos) {
            out.push_back(std::stod(tok));
            continue;
        }
        auto c2 = tok.find(':', c1 + 1);
        if (c2 == std::string::npos) throw CLI::ValidationError("grid needs lo:hi:step");
        double lo = std::stod(tok.substr(0, c1));
        double hi = std::stod(tok.substr(c1 + 1, c2 - c1 - 1));
        double step = std::stod(tok.substr(c2 + 1));
        if (step <= 0) throw CLI::ValidationError("grid step must be positive");
        for (double x = lo; x <= hi + step * 1e-9; x += step) out.push_back(x);
    }
    if (out.empty()) throw CLI::ValidationError("empty lambda list");
    return out;
}

// "1,2,3" or "1-12", mixable by commas.
std::vector<int> parse_k_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        auto dash = tok.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoi(tok));
            continue;
        }
        int lo = std::stoi(tok.substr(0, dash));
        int hi = std::stoi(tok.substr(dash + 1));
        for (int k = lo; k <= hi; ++k) out.push_back(k);
    }
    if (out.empty()) throw CLI::ValidationError("empty k list");
    return out;
}

json make_manifest(const std::string& subcommand,
                   const std::vector<std::pair<std::string, std::string>>& params) {
    json m;
    m["tool"] = "dioph-lab";
    m["version"] = dioph_version();
    m["subcommand"] = subcommand;
    m["precision_bits"] = dioph_get_precision();
    json p;
    for (const auto& [k, v] : params) p[k] = v;
    m["params"] = p;
    return m;
}

std::string manifest_csv_header(const json& manifest) {
    std::ostringstream os;
    os << "# tool: " << manifest["tool"].get<std::string>() << " "
       << manifest["version"].get<std::string>() << "\n";
    os << "# subcommand: " << manifest["subcommand"].get<std::string>() << "\n";
    os << "# precision_bits: " << manifest["precision_bits"].get<unsigned>() << "\n";
    for (const auto& [k, v] : manifest["params"].items())
        os << "# " << k << ": " << v.get<std::string>() << "\n";
    return os.str();
}

int write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return kExitOk;
    }
    std::ofstream f(out_path);
    if (!f) {
        std::cerr << "dioph-lab: cannot open " << out_path << " for writing\n";
        return kExitIo;
    }
    f << text;
    if (!f) {
        std::cerr << "dioph-lab: write to " << out_path << " failed\n";
        return kExitIo;
    }
    return kExitOk;
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) return std::nullopt;
    std::ostringstream os;
    os << f.rdbuf();
    if (!f && !f.eof()) return std::nullopt;
    return os.str();
}

struct CString {
    char* p = nullptr;
    ~CString() { dioph_free_string(p); }
};

std::string records_csv(const json& doc) {
    std::ostringstream os;
    const json& rs = doc.at("records");
    std::size_t n = rs.empty() ? 0 : rs.at(0).at("a").size();
    os << "q";
    for (std::size_t i = 0; i < n; ++i) os << ",a" << i + 1;
    os << ",xi,xi_err\n";
    for (const auto& r : rs) {
        os << r.at("q").get<std::string>();
        for (const auto& a : r.at("a")) os << "," << a.get<std::string>();
        os << "," << r.at("xi").get<std::string>() << ","
           << r.at("xi_err").get<std::string>() << "\n";
    }
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-arithmetic laboratory for best simultaneous approximations in R^3"};
    app.require_subcommand(1);

    unsigned precision_bits = 0;
    app.add_option("--precision-bits", precision_bits,
                   "working precision in bits (overrides DIOPH_LAB_PRECISION)");

    std::string lambda_list = "0.5", k_list = "1", out_path, format = "json";
    double lambda = 0.5;
    int k = 1, steps = 30;
    std::string q1 = "1000000", qmax = "100000", target_spec, artifact_path;

    CLI::App* roots = app.add_subcommand("roots", "tabulate the growth-exponent roots");
    roots->add_option("--lambda", lambda_list, "lambda grid: comma list and/or lo:hi:step");
    roots->add_option("--k", k_list, "k values: comma list and/or lo-hi");
    roots->add_option("--out", out_path, "output file (default stdout)");
    roots->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* analyze = app.add_subcommand("analyze", "best-approximation analysis of a target");
    analyze
        ->add_option("--target", target_spec,
                     "coordinates, comma separated: integer, p/q, decimal, or sqrt:N")
        ->required();
    analyze->add_option("--qmax", qmax, "denominator bound (decimal string)");
    analyze->add_option("--out", out_path, "output file (default stdout)");
    analyze->add_option("--format", format, "json or csv (csv: records table)")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* synth = app.add_subcommand("synthesize", "construct a target realizing A^k B");
    synth->add_option("--lambda", lambda, "uniform exponent in [0.34, 0.99]");
    synth->add_option("--k", k, "A-run length");
    synth->add_option("--steps", steps, "total vectors to build");
    synth->add_option("--q1", q1, "first denominator (decimal string)");
    synth->add_option("--out", out_path, "artifact file (default stdout)");

    CLI::App* verify = app.add_subcommand("verify", "re-verify a synthesis artifact");
    verify->add_option("artifact", artifact_path, "artifact JSON file")->required();
    verify->add_option("--out", out_path, "report file (default stdout)");

    CLI::App* selftest = app.add_subcommand("selftest", "quick internal consistency suite");
    selftest->add_option("--out", out_path, "report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (precision_bits == 0) {
        if (const char* env = std::getenv("DIOPH_LAB_PRECISION")) {
            char* end = nullptr;
            unsigned long v = std::strtoul(env, &end, 10);
            if (end && *end == '\0' && v > 0) precision_bits = static_cast<unsigned>(v);
        }
    }
    dioph_set_precision(precision_bits);

    try {
        if (roots->parsed()) {
            auto ls = parse_lambda_list(lambda_list);
            auto ks = parse_k_list(k_list);
            json manifest = make_manifest(
                "roots", {{"lambda", lambda_list}, {"k", k_list}, {"format", format}});
            CString text;
            dioph_status st =
                dioph_roots(ls.data(), ls.size(), ks.data(), ks.size(), format.c_str(), &text.p);
            if (st != DIOPH_OK) {
                report_error("roots");
                return exit_of(st);
            }
            if (format == "csv")
                return write_output(manifest_csv_header(manifest) + text.p, out_path);
            json doc = json::parse(text.p);
            doc["manifest"] = manifest;
            return write_output(doc.dump(2) + "\n", out_path);
        }

        if (analyze->parsed()) {
            json manifest = make_manifest(
                "analyze", {{"target", target_spec}, {"qmax", qmax}, {"format", format}});
            CString text;
            dioph_status st = dioph_analyze(target_spec.c_str(), qmax.c_str(), &text.p);
            if (st != DIOPH_OK) {
                report_error("analyze");
                return exit_of(st);
            }
            json doc = json::parse(text.p);
            doc["manifest"] = manifest;
            if (format == "csv")
                return write_output(manifest_csv_header(manifest) + records_csv(doc), out_path);
            return write_output(doc.dump(2) + "\n", out_path);
        }

        if (synth->parsed()) {
            json manifest = make_manifest("synthesize", {{"lambda", std::to_string(lambda)},
                                                         {"k", std::to_string(k)},
                                                         {"steps", std::to_string(steps)},
                                                         {"q1", q1}});
            CString text;
            dioph_status st = dioph_synthesize(lambda, k, steps, q1.c_str(), &text.p);
            if (st != DIOPH_OK && !text.p) {
                report_error("synthesize");
                return exit_of(st);
            }
            json doc = json::parse(text.p);
            doc["manifest"] = manifest;
            int wr = write_output(doc.dump(2) + "\n", out_path);
            if (wr != kExitOk) return wr;
            if (st != DIOPH_OK) {
                report_error("synthesize");
                return exit_of(st);
            }
            return kExitOk;
        }

        if (verify->parsed()) {
            auto content = read_file(artifact_path);
            if (!content) {
                std::cerr << "dioph-lab: cannot read " << artifact_path << "\n";
                return kExitIo;
            }
            json manifest = make_manifest("verify", {{"artifact", artifact_path}});
            CString text;
            dioph_status st = dioph_verify(content->c_str(), &text.p);
            if (!text.p) {
                report_error("verify");
                // Unparseable or structurally broken artifact file.
                return st == DIOPH_ERR_ARGUMENT ? kExitIo : exit_of(st);
            }
            json doc = json::parse(text.p);
            doc["manifest"] = manifest;
            int wr = write_output(doc.dump(2) + "\n", out_path);
            if (wr != kExitOk) return wr;
            if (st != DIOPH_OK) report_error("verify");
            return exit_of(st);
        }

        if (selftest->parsed()) {
            json manifest = make_manifest("selftest", {});
            CString text;
            dioph_status st = dioph_selftest(&text.p);
            if (!text.p) {
                report_error("selftest");
                return exit_of(st);
            }
            json doc = json::parse(text.p);
            doc["manifest"] = manifest;
            int wr = write_output(doc.dump(2) + "\n", out_path);
            if (wr != kExitOk) return wr;
            return exit_of(st);
        }
    } catch (const json::exception& e) {
        std::cerr << "dioph-lab: " << e.what() << "\n";
        return kExitIo;
    } catch (const CLI::Error& e) {
        std::cerr << "dioph-lab: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "dioph-lab: " << e.what() << "\n";
        return kExitCondition;
    }
    return kExitUsage;
}
