#pragma once

// Serialization and artifact plumbing: JSON documents for analysis and
// synthesis runs, the roots table in CSV or JSON, and the re-verification of
// a stored synthesis artifact. Big integers and rational endpoints travel as
// decimal strings; JSON numbers would truncate them at 64 bits.

#include "dioph/approx.hpp"
#include "dioph/exponents.hpp"
#include "dioph/patterns.hpp"
#include "dioph/synth.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dioph {

// Every output file embeds one of these, so a report is traceable to the
// exact invocation that produced it.
struct RunManifest {
    std::string tool = "dioph-lab";
    std::string version;
    std::string subcommand;
    unsigned precision_bits = 0;
    std::map<std::string, std::string> params;
};

nlohmann::json manifest_json(const RunManifest& m);

std::string rat_str(const mpq_class& q); // "num/den", canonical
mpq_class rat_parse(const std::string& s);

// xi as a decimal string with an explicit error bound, derived from the
// exact enclosure of xi^2.
std::pair<std::string, std::string> xi_decimal(const RatInterval& xi_sq);

nlohmann::json record_json(const BestApproxRecord& r);
nlohmann::json records_json(const std::vector<BestApproxRecord>& rs);
BestApproxRecord record_parse(const nlohmann::json& j);

nlohmann::json estimate_json(const ExponentEstimate& e);
nlohmann::json word_json(const PatternWord& w);
nlohmann::json k_estimate_json(const KEstimate& k);
nlohmann::json schmidt_json(const std::vector<SchmidtReport>& reps);
nlohmann::json chain_json(int k, double lambda, const ExponentChain& ch);
nlohmann::json condition_json(const ConditionReport& rep);
nlohmann::json step_json(const StepRecord& s);
nlohmann::json intvec_json(const IntVec& v);
IntVec intvec_parse(const nlohmann::json& j);

// Full analysis document: records, word, k estimate, exponent estimates and
// Schmidt reports for one best-approximation sequence.
nlohmann::json analysis_json(const std::vector<BestApproxRecord>& records,
                             const std::string& target_description);

// Complete synthesis artifact; verify_artifact below re-derives everything
// checkable from this document alone.
nlohmann::json synth_artifact_json(const SynthResult& r);

// Roots table over a lambda grid and k range; values printed to 12 digits
// (the documented tolerance is 1e-10).
nlohmann::json roots_json(const std::vector<double>& lambdas, const std::vector<int>& ks);
std::string roots_csv(const std::vector<double>& lambdas, const std::vector<int>& ks);

struct VerifyOutcome {
    bool combinations_ok = false; // every vector is its stored combination
    bool dets_ok = false;         // determinant chain replays to +-1
    bool angles_ok = false;       // angle window at every vertex
    bool nesting_ok = false;      // neighborhood chain still nests
    bool word_ok = false;         // stored word matches a fresh extraction
    bool schmidt_ok = false;      // height inequality on every B window
    bool round_trip_ok = false;   // engine reproduces the stored vectors
    bool round_trip_ran = false;
    bool precision_exhausted = false;
    nlohmann::json detail;
    bool all_ok() const {
        return combinations_ok && dets_ok && angles_ok && nesting_ok && word_ok &&
               schmidt_ok && (!round_trip_ran || round_trip_ok);
    }
};

// Recomputes the verifiable content of a synthesis artifact from its stored
// vectors and assembly data: integer combinations, determinant chain, angle
// windows, neighborhood nesting, the pattern word, Schmidt inequalities, and
// (when at least five vectors are stored) the engine round trip against the
// stored alpha enclosure. Any mutation of the stored numbers trips at least
// one of these.
VerifyOutcome verify_artifact(const nlohmann::json& artifact);

} // namespace dioph
