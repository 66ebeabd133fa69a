#include <cmath>

#include <gtest/gtest.h>

#include "support/worked_examples.h"

namespace qrsim {
namespace {

using testing::document_config;
using testing::load_example;

const std::set<int> kKs = {1, 2, 3};

// Probability that the biased coin says 1, read off its program per k.
double biased_one(int k) { return k == 1 ? 0.75 : k == 2 ? 0.625 : 0.5625; }

TEST(CompareViews, IdenticalConfigurationsHaveDistanceZero) {
    for (const auto& [file, name] : {std::pair{"otp.json", "otp_real_h"}, std::pair{"otp.json", "otp_ideal_h"},
                                     std::pair{"teleport.json", "teleport_plus"}}) {
        const auto doc = load_example(file);
        const auto cfg = doc.configuration(name);
        const Verdict v = compare_views(cfg, cfg, cfg.user->name, kKs, document_config(doc));
        EXPECT_TRUE(v.pass) << name;
        for (const auto& [k, c] : v.per_k) EXPECT_EQ(c.sd, 0.0) << name << " k=" << k;
    }
}

TEST(CompareViews, RejectsMismatchedUsers) {
    const auto doc = load_example("otp.json");
    const auto cfg = doc.configuration("otp_real_h");
    EXPECT_THROW(compare_views(cfg, cfg, "Hfixed", kKs, document_config(doc)), std::invalid_argument);
    EXPECT_THROW(compare_views(cfg, cfg, "H", {}, document_config(doc)), std::invalid_argument);
}

TEST(CompareViews, LargeDefectMakesVerdictUnreliable) {
    const auto doc = load_example("otp.json");
    const auto cfg = doc.configuration("otp_real_h");
    const Verdict v = compare_views(cfg, cfg, "H", {1}, document_config(doc, 2));
    EXPECT_FALSE(v.reliable);
    EXPECT_FALSE(v.pass);
    EXPECT_GT(v.per_k.at(1).real_defect, 0.5);
    EXPECT_FALSE(v.notes.empty());
}

TEST(CompareViews, DistanceStaysWithinDefects) {
    const auto doc = load_example("otp.json");
    const auto real = make_config(doc.structure("plain_real"), doc.machine("Hfixed"), doc.machine("Ar"));
    const auto ideal = make_config(doc.structure("otp_ideal"), doc.machine("Hfixed"), doc.machine("AsZero"));
    for (int budget : {3, 6, 64}) {
        const Verdict v = compare_views(real, ideal, "Hfixed", {1}, document_config(doc, budget));
        const auto& c = v.per_k.at(1);
        EXPECT_GE(c.sd, 0.0);
        EXPECT_LE(c.sd, 1.0 + c.real_defect + c.ideal_defect + 1e-12);
    }
}

TEST(CheckClaim, OneTimePadIsPerfect) {
    const auto doc = load_example("otp.json");
    const auto result = check_claim(doc.claim("otp"), kKs, document_config(doc));
    ASSERT_TRUE(result.malformed.ok()) << result.malformed.str();
    EXPECT_TRUE(result.pass);
    ASSERT_EQ(result.verdicts.size(), 2u);
    for (const auto& v : result.verdicts)
        for (const auto& [k, c] : v.per_k) {
            EXPECT_LE(c.sd, 1e-9) << "k=" << k;
            EXPECT_EQ(c.real_defect + c.ideal_defect, 0.0);
        }
}

TEST(CheckClaim, PlaintextChannelIsDistinguished) {
    const auto doc = load_example("otp.json");
    const auto result = check_claim(doc.claim("plaintext"), kKs, document_config(doc));
    ASSERT_TRUE(result.malformed.ok()) << result.malformed.str();
    EXPECT_FALSE(result.pass);
    for (const auto& [k, c] : result.verdicts.at(0).per_k) EXPECT_NEAR(c.sd, 1.0, 1e-12) << "k=" << k;
}

TEST(CheckClaim, StatisticalCoinMeetsHalvingBound) {
    const auto doc = load_example("coin.json");
    const auto result = check_claim(doc.claim("coin"), kKs, document_config(doc));
    ASSERT_TRUE(result.malformed.ok()) << result.malformed.str();
    EXPECT_TRUE(result.pass);
    for (const auto& [k, c] : result.verdicts.at(0).per_k) {
        EXPECT_NEAR(c.sd, std::ldexp(1.0, -k - 1), 1e-12) << "k=" << k;
        EXPECT_NEAR(c.sd, biased_one(k) - 0.5, 1e-12);
        EXPECT_EQ(result.verdicts[0].bound.at(k), std::ldexp(1.0, -k));
    }
    EXPECT_FALSE(check_claim(doc.claim("coin_perfect"), kKs, document_config(doc)).pass);
}

TEST(CheckClaim, TighterBoundFails) {
    const auto doc = load_example("coin.json");
    auto claim = doc.claim("coin");
    claim.bounds[2] = 0.1;
    EXPECT_FALSE(check_claim(claim, kKs, document_config(doc)).pass);
}

TEST(CheckClaim, UniversalNeedsOneSimulatorPerAdversary) {
    const auto doc = load_example("otp.json");
    auto claim = doc.claim("otp");
    claim.witnesses[1].simulator = doc.machine("AsZero");
    const auto result = check_claim(claim, kKs, document_config(doc));
    EXPECT_TRUE(result.malformed.mentions("simulator independent of the user"));
    EXPECT_TRUE(result.verdicts.empty());
    EXPECT_FALSE(result.pass);
    claim.flavor = SecurityFlavor::standard;
    EXPECT_TRUE(validate_claim(claim, kKs).ok());
}

TEST(CheckClaim, MalformedShapes) {
    const auto otp = load_example("otp.json");
    auto claim = otp.claim("otp");
    claim.ideal = otp.structure("wrapper");
    EXPECT_TRUE(validate_claim(claim, kKs).mentions("identical service ports"));

    auto coin = load_example("coin.json").claim("coin");
    EXPECT_TRUE(validate_claim(coin, {1, 2, 3, 4}).mentions("statistical bound"));
    coin.witnesses.clear();
    EXPECT_TRUE(validate_claim(coin, kKs).mentions("witnesses"));
}

TEST(CheckClaim, UnsuitableUserIsMalformed) {
    const auto doc = load_example("otp.json");
    auto claim = doc.claim("otp");
    // The wrapper's user does not fit the bare protocol.
    claim.witnesses = {{doc.machine("Hw"), doc.machine("Ar"), doc.machine("As")}};
    const auto result = check_claim(claim, kKs, document_config(doc));
    EXPECT_FALSE(result.malformed.ok());
    EXPECT_FALSE(result.pass);
}

TEST(ChainVerdicts, AddsDistances) {
    Verdict a, b;
    a.per_k = {{1, {0.0, 0.0, 0.0}}, {2, {0.1, 0.01, 0.0}}};
    b.per_k = {{1, {0.0, 0.0, 0.0}}, {2, {0.2, 0.0, 0.02}}};
    a.bound = b.bound = {{1, 1e-9}, {2, 0.25}};
    const Verdict c = chain_verdicts(a, b);
    EXPECT_EQ(c.per_k.at(1).sd, 0.0);
    EXPECT_NEAR(c.per_k.at(2).sd, 0.3, 1e-15);
    EXPECT_NEAR(c.per_k.at(2).real_defect, 0.01, 1e-15);
    EXPECT_NEAR(c.per_k.at(2).ideal_defect, 0.02, 1e-15);
    EXPECT_NEAR(c.bound.at(2), 0.5, 1e-15);
    EXPECT_TRUE(c.pass);

    Verdict d;
    d.per_k = {{1, {0.0, 0.0, 0.0}}};
    EXPECT_THROW(chain_verdicts(a, d), std::invalid_argument);
    EXPECT_THROW(chain_verdicts(d, a), std::invalid_argument);
}

TEST(ChainVerdicts, ChainedBoundCoversDirectDistance) {
    const auto doc = load_example("coin.json");
    Json mid = machine_to_json(*doc.machine("Fair"));
    mid["name"] = "Mid";
    mid["delta"]["program"][0]["values"] = Json::parse(R"j([["0", 0.4], ["1", 0.6]])j");
    const auto middle = make_structure(Collection({machine_from_json(mid, doc.alphabet.message_space())}),
                                       doc.structure("fair").service);
    const auto h = doc.machine("H"), nobody = doc.machine("Nobody");
    const auto real = make_config(doc.structure("biased"), h, nobody);
    const auto between = make_config(middle, h, nobody);
    const auto ideal = make_config(doc.structure("fair"), h, nobody);
    const auto rc = document_config(doc);
    const Verdict direct = compare_views(real, ideal, "H", kKs, rc);
    const Verdict chained = chain_verdicts(compare_views(real, between, "H", kKs, rc),
                                           compare_views(between, ideal, "H", kKs, rc));
    for (const int k : kKs) {
        EXPECT_NEAR(chained.per_k.at(k).sd, std::abs(biased_one(k) - 0.6) + 0.1, 1e-12);
        EXPECT_GE(chained.per_k.at(k).sd + 1e-12, direct.per_k.at(k).sd) << "k=" << k;
    }
}

TEST(Composition, WrappedOneTimePadStaysPerfect) {
    const auto doc = load_example("otp.json");
    const auto claim = testing::composed_otp_claim(doc);
    EXPECT_EQ(claim.real.service, testing::port_set({"req-?", "req<?", "res-!"}));
    EXPECT_EQ(claim.ideal.service, claim.real.service);
    const auto result = check_claim(claim, kKs, document_config(doc));
    ASSERT_TRUE(result.malformed.ok()) << result.malformed.str();
    EXPECT_TRUE(result.pass);
    for (const auto& [k, c] : result.verdicts.at(0).per_k) EXPECT_LE(c.sd, 1e-9) << "k=" << k;
}

TEST(Teleportation, DeliversEveryInputState) {
    const auto doc = load_example("teleport.json");
    const auto real = doc.structure("teleport_real");
    const auto msgs = doc.machine("H0")->qregs[0];
    for (const auto& [user, psi] : testing::teleport_inputs(msgs)) {
        const auto cfg = make_config(real, doc.machine(user), doc.machine("Ar"));
        EXPECT_NEAR(testing::delivered_fidelity(cfg, psi, document_config(doc)), 1.0, 1e-9) << user;
    }
    const auto result = check_claim(doc.claim("teleport"), {1, 2}, document_config(doc));
    ASSERT_TRUE(result.malformed.ok()) << result.malformed.str();
    EXPECT_TRUE(result.pass);
}

TEST(Names, Modes) {
    EXPECT_EQ(to_string(SecurityMode::statistical), "statistical");
    EXPECT_EQ(to_string(SecurityFlavor::universal), "universal");
}

}  // namespace
}  // namespace qrsim
