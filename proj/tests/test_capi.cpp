#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dioph_lab.h"

#include "json.hpp"

#include <cstring>
#include <string>

using nlohmann::json;

namespace {

// RAII wrapper so failed CHECKs cannot leak the C strings.
struct CStr {
    char* p = nullptr;
    ~CStr() { dioph_free_string(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

} // namespace

TEST_CASE("version and precision knobs") {
    CHECK(std::strcmp(dioph_version(), "0.1.0") == 0);
    unsigned before = dioph_get_precision();
    dioph_set_precision(320);
    CHECK(dioph_get_precision() == 320);
    dioph_set_precision(0); // keep current
    CHECK(dioph_get_precision() == 320);
    dioph_set_precision(before);
}

TEST_CASE("roots table in json and csv") {
    double lambdas[] = {0.5, 0.6};
    int ks[] = {1, 2};
    CStr out;
    REQUIRE(dioph_roots(lambdas, 2, ks, 2, "json", &out.p) == DIOPH_OK);
    json doc = json::parse(out.str());
    REQUIRE(doc.contains("rows"));
    REQUIRE(doc["rows"].size() == 4);
    const json& r0 = doc["rows"][0];
    CHECK(r0["lambda"].get<double>() == doctest::Approx(0.5));
    CHECK(r0["k"].get<int>() == 1);
    CHECK(std::stod(r0["g_k"].get<std::string>()) ==
          doctest::Approx(1.70710678118654752).epsilon(1e-11));
    CHECK(std::stod(r0["gbar"].get<std::string>()) == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(r0["u_period"].get<int>() == 2);

    CStr csv;
    REQUIRE(dioph_roots(lambdas, 2, ks, 2, "csv", &csv.p) == DIOPH_OK);
    std::string s = csv.str();
    CHECK(s.find("lambda,k,g_k,G_lambda,gbar,g_k0,g_k1,u_period") != std::string::npos);
    CHECK(s.find("1.707106781187") != std::string::npos);

    CHECK(dioph_roots(nullptr, 1, ks, 1, "json", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_roots(lambdas, 1, ks, 1, "yaml", &out.p) == DIOPH_ERR_ARGUMENT);
    double bad = 0.1;
    CHECK(dioph_roots(&bad, 1, ks, 1, "json", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(std::string(dioph_last_error()).find("lambda") != std::string::npos);
}

TEST_CASE("analysis of rational and quadratic targets") {
    CStr out;
    // Non-integer rational targets always end in an exact tie: the residues
    // at q and L - q mirror each other (L = lcm of the denominators), so a
    // tied candidate shows up before the scan can reach the exact hit at L.
    CHECK(dioph_analyze("1/3,2/7,6/11", "1000", &out.p) == DIOPH_ERR_TIE);
    CHECK(std::string(dioph_last_error()).find("tie") != std::string::npos);

    // Integer targets terminate immediately: one record, exact hit at q = 1.
    REQUIRE(dioph_analyze("2,-1,5", "1000", &out.p) == DIOPH_OK);
    json doc = json::parse(out.str());
    REQUIRE(doc.contains("records"));
    const json& recs = doc["records"];
    REQUIRE(recs.size() == 1);
    CHECK(recs.back()["q"].get<std::string>() == "1");
    CHECK(recs.back()["xi"].get<std::string>().substr(0, 1) == "0");

    // Golden ratio: Fibonacci denominators.
    CStr g;
    REQUIRE(dioph_analyze("sqrt:5", "200", &g.p) == DIOPH_OK);
    json gd = json::parse(g.str());
    bool saw_fib = false;
    for (const auto& r : gd["records"])
        if (r["q"].get<std::string>() == "169") saw_fib = true;
    // sqrt(5) ~ 2.236: its continued fraction is [2; 4, 4, ...], denominators
    // 1, 4, 17, 72, 305; 169 must not appear, 72 must.
    CHECK(!saw_fib);
    bool saw72 = false;
    for (const auto& r : gd["records"])
        if (r["q"].get<std::string>() == "72") saw72 = true;
    CHECK(saw72);

    CHECK(dioph_analyze("1/3,1/2", "notanumber", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_analyze("sqrt:-5", "100", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_analyze("", "100", &out.p) == DIOPH_ERR_ARGUMENT);
    // A tie-bound target: alpha = 1/2 ties at q = 1.
    CHECK(dioph_analyze("1/2", "100", &out.p) == DIOPH_ERR_TIE);
}

TEST_CASE("synthesis artifact and verification round trip") {
    CStr art;
    REQUIRE(dioph_synthesize(0.5, 1, 8, "2000", &art.p) == DIOPH_OK);
    json doc = json::parse(art.str());
    REQUIRE(doc.contains("vectors"));
    CHECK(doc["vectors"].size() == 8);
    CHECK(doc["condition_report"]["exact_all"].get<bool>());
    CHECK(doc["config"]["lambda"].get<double>() == doctest::Approx(0.5));
    REQUIRE(doc.contains("alpha"));
    REQUIRE(doc["alpha"]["enclosure"].size() == 3);

    CStr rep;
    CHECK(dioph_verify(art.str().c_str(), &rep.p) == DIOPH_OK);
    json v = json::parse(rep.str());
    CHECK(v["all_ok"].get<bool>());
    CHECK(v["combinations_ok"].get<bool>());
    CHECK(v["dets_ok"].get<bool>());
    CHECK(v["angles_ok"].get<bool>());
    CHECK(v["nesting_ok"].get<bool>());
    CHECK(v["word_ok"].get<bool>());
    CHECK(v["schmidt_ok"].get<bool>());

    // Tamper with one coordinate: verification must fail with a condition
    // status and name the mismatch.
    json bad = doc;
    std::string t = bad["vectors"][5]["a"][1].get<std::string>();
    t.back() = (t.back() == '7') ? '8' : '7'; // flip the last digit
    bad["vectors"][5]["a"][1] = t;
    CStr rep2;
    CHECK(dioph_verify(bad.dump().c_str(), &rep2.p) == DIOPH_ERR_CONDITION);
    json v2 = json::parse(rep2.str());
    CHECK(!v2["all_ok"].get<bool>());

    CStr rep3;
    CHECK(dioph_verify("{ not json", &rep3.p) == DIOPH_ERR_ARGUMENT);
}

TEST_CASE("synthesis rejects bad parameters and budget violations") {
    CStr out;
    CHECK(dioph_synthesize(0.1, 1, 8, "2000", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_synthesize(0.5, 1, 8, "abc", &out.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_synthesize(0.6, 1, 30, "1000000", &out.p) == DIOPH_ERR_BUDGET);
    CHECK(std::string(dioph_last_error()).size() > 0);
}

TEST_CASE("incremental synthesis handle") {
    dioph_synth* s = nullptr;
    REQUIRE(dioph_synth_new(0.5, 1, 10, "2000", &s) == DIOPH_OK);
    REQUIRE(s != nullptr);
    CHECK(dioph_synth_size(s) == 0);
    REQUIRE(dioph_synth_init(s) == DIOPH_OK);
    CHECK(dioph_synth_size(s) == 3);
    while (dioph_synth_size(s) < 6) REQUIRE(dioph_synth_step(s) == DIOPH_OK);

    CStr v;
    REQUIRE(dioph_synth_vector(s, 0, &v.p) == DIOPH_OK);
    json jv = json::parse(v.str());
    CHECK(jv["q"].get<std::string>() == "2000");
    REQUIRE(jv["a"].size() == 3);

    CStr bad;
    CHECK(dioph_synth_vector(s, 99, &bad.p) == DIOPH_ERR_ARGUMENT);
    CHECK(dioph_synth_vector(s, -1, &bad.p) == DIOPH_ERR_ARGUMENT);

    CStr rep;
    REQUIRE(dioph_synth_report(s, &rep.p) == DIOPH_OK);
    json jr = json::parse(rep.str());
    CHECK(jr["exact_all"].get<bool>());

    dioph_synth_free(s);

    dioph_synth* s2 = nullptr;
    CHECK(dioph_synth_new(0.2, 1, 10, "2000", &s2) == DIOPH_ERR_ARGUMENT);
    CHECK(s2 == nullptr);
}

TEST_CASE("selftest runs green") {
    CStr out;
    REQUIRE(dioph_selftest(&out.p) == DIOPH_OK);
    json doc = json::parse(out.str());
    REQUIRE(doc.contains("checks"));
    CHECK(doc["checks"].size() >= 5);
    for (const auto& c : doc["checks"]) CHECK(c["ok"].get<bool>());
}
