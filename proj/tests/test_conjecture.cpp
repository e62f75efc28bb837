#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mobal/conjecture.hpp"
#include "mobal/netsys.hpp"

using namespace mobal;

namespace {

ConjectureSpace section_space(const std::vector<double>& ps = {0.0, 0.5, 1.0}) {
    ConjectureSpace space;
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    for (double p : ps) {
        space.parameters.push_back({p});
        space.models.push_back(netsys::build_model(env, p));
    }
    validate_space(space);
    return space;
}

}  // namespace

TEST_CASE("posterior_update: flat likelihood leaves the posterior unchanged") {
    ConjectureSpace space = section_space();
    // blocking recovers/shields under every conjecture, so the predictive
    // distribution is identical across the space
    Posterior rho{0.2, 0.5, 0.3};
    Posterior next = posterior_update(space, rho, {0.3, 0.7}, /*action=*/1, /*obs=*/4);
    for (int i = 0; i < 3; ++i) CHECK(next[i] == doctest::Approx(rho[i]).epsilon(1e-12));
}

TEST_CASE("posterior_update matches a hand-rolled three-term Bayes rule") {
    ConjectureSpace space = section_space();
    Belief b{1.0, 0.0};
    int action = 0, obs = 5;
    Posterior prior = uniform_posterior(3);
    Posterior got = posterior_update(space, prior, b, action, obs);
    // oracle: direct products, no log space
    std::vector<double> w(3);
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        double lik = 0.0;
        const PomdpModel& m = space.models[i];
        for (int s = 0; s < 2; ++s)
            for (int s2 = 0; s2 < 2; ++s2) lik += b[s] * m.trans(action, s, s2) * m.obs(s2, obs);
        w[i] = prior[i] * lik;
        total += w[i];
    }
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(w[i] / total).epsilon(1e-12));
    validate_posterior(got, 3);
}

TEST_CASE("posterior_update zeroes conjectures with zero likelihood and flags degenerate evidence") {
    // one-state toys with disjoint observation supports
    PomdpModel a;
    a.n_states = 1;
    a.n_actions = 1;
    a.n_observations = 2;
    a.discount = 0.9;
    a.transition = {1.0};
    a.observation = {1.0, 0.0};
    a.cost = {0.0};
    validate_model(a);
    PomdpModel b = a;
    b.observation = {0.0, 1.0};
    validate_model(b);
    ConjectureSpace space{{{0.0}, {1.0}}, {a, b}};

    Posterior rho = uniform_posterior(2);
    Posterior next = posterior_update(space, rho, {1.0}, 0, 1);
    CHECK(next[0] == 0.0);
    CHECK(next[1] == doctest::Approx(1.0));

    // once the posterior sits on a conjecture that cannot produce o=0,
    // evidence degenerates
    CHECK_THROWS_AS(posterior_update(space, next, {1.0}, 0, 0), degenerate_evidence);
}

TEST_CASE("posterior stays normalized through ten thousand sequential updates") {
    ConjectureSpace space = section_space();
    Posterior rho = uniform_posterior(3);
    Rng rng = make_rng(123);
    Belief b{0.8, 0.2};
    for (int t = 0; t < 10000; ++t) {
        int obs = static_cast<int>(rng() % 8);
        rho = posterior_update(space, rho, b, 0, obs);
        validate_posterior(rho, 3);
    }
}

TEST_CASE("observation_likelihood_mc approaches the exact likelihood") {
    ConjectureSpace space = section_space();
    Rng rng = make_rng(77);
    const PomdpModel& m = space.models[1];
    Belief b{0.6, 0.4};
    for (int o : {0, 3, 7}) {
        double exact = observation_likelihood(m, b, 0, o);
        double approx = observation_likelihood_mc(m, b, 0, o, 200000, rng);
        CHECK(std::abs(exact - approx) < 0.01);
    }
}

TEST_CASE("posterior_update_mc tracks the exact update") {
    ConjectureSpace space = section_space();
    Rng rng = make_rng(78);
    Posterior prior = uniform_posterior(3);
    Belief b{1.0, 0.0};
    Posterior exact = posterior_update(space, prior, b, 0, 6);
    Posterior approx = posterior_update_mc(space, prior, b, 0, 6, 200000, rng);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(exact[i] - approx[i]) < 0.02);
}

TEST_CASE("sample_conjecture: point mass, frequencies, determinism") {
    Rng rng = make_rng(5);
    for (int i = 0; i < 100; ++i) CHECK(sample_conjecture({0.0, 1.0, 0.0}, rng) == 1);

    std::vector<int> counts(3, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_conjecture({1.0 / 3, 1.0 / 3, 1.0 / 3}, rng)];
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(static_cast<double>(counts[i]) / draws - 1.0 / 3) < 0.01);

    Rng r1 = make_rng(9), r2 = make_rng(9);
    for (int i = 0; i < 50; ++i)
        CHECK(sample_conjecture({0.2, 0.3, 0.5}, r1) == sample_conjecture({0.2, 0.3, 0.5}, r2));
}

TEST_CASE("discrepancy: zero for the true model, non-negative everywhere") {
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    PomdpModel true_model = netsys::build_model(env);  // p = 0.2
    ConjectureSpace space = section_space({0.0, 0.2, 0.5, 1.0});

    EmpiricalHistory hist;
    hist.beliefs = {{1.0, 0.0}, {0.7, 0.3}, {0.2, 0.8}};
    hist.actions = {0, 0, 1};

    CHECK(discrepancy(space, 1, true_model, hist) == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i < space.size(); ++i) CHECK(discrepancy(space, i, true_model, hist) >= -1e-12);
}

TEST_CASE("discrepancy equals the hand-enumerated eight-term KL sum") {
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    PomdpModel true_model = netsys::build_model(env);
    ConjectureSpace space = section_space();
    EmpiricalHistory hist;
    hist.beliefs = {{1.0, 0.0}};
    hist.actions = {0};

    const PomdpModel& conj = space.models[1];  // p = 0.5
    double expected = 0.0;
    for (int o = 0; o < 8; ++o) {
        double pt = 0.0, pc = 0.0;
        for (int s2 = 0; s2 < 2; ++s2) {
            pt += true_model.trans(0, 0, s2) * true_model.obs(s2, o);
            pc += conj.trans(0, 0, s2) * conj.obs(s2, o);
        }
        expected += pt * std::log(pt / pc);
    }
    CHECK(discrepancy(space, 1, true_model, hist) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("discrepancy returns the infinity sentinel on conjectured-impossible evidence") {
    PomdpModel truth;
    truth.n_states = 1;
    truth.n_actions = 1;
    truth.n_observations = 2;
    truth.discount = 0.9;
    truth.transition = {1.0};
    truth.observation = {0.5, 0.5};
    truth.cost = {0.0};
    validate_model(truth);
    PomdpModel blind = truth;
    blind.observation = {1.0, 0.0};
    validate_model(blind);
    ConjectureSpace space{{{0.0}}, {blind}};
    EmpiricalHistory hist{{{1.0}}, {0}};
    CHECK(std::isinf(discrepancy(space, 0, truth, hist)));
}

TEST_CASE("discrepancy pairs every belief with the global action marginal") {
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    PomdpModel true_model = netsys::build_model(env);
    ConjectureSpace space = section_space();
    EmpiricalHistory hist;
    hist.beliefs = {{1.0, 0.0}, {1.0, 0.0}};
    hist.actions = {0, 1};  // marginal (0.5, 0.5) applied to every belief

    const PomdpModel& conj = space.models[2];  // p = 1
    double expected = 0.0;
    for (const Belief& b : hist.beliefs) {
        for (int o = 0; o < 8; ++o) {
            double pt = 0.0, pc = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int s = 0; s < 2; ++s)
                    for (int s2 = 0; s2 < 2; ++s2) {
                        pt += 0.5 * b[s] * true_model.trans(a, s, s2) * true_model.obs(s2, o);
                        pc += 0.5 * b[s] * conj.trans(a, s, s2) * conj.obs(s2, o);
                    }
            expected += pt * std::log(pt / pc);
        }
    }
    expected /= hist.beliefs.size();
    CHECK(discrepancy(space, 2, true_model, hist) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("consistent_set contains the true model and respects the tolerance") {
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    PomdpModel true_model = netsys::build_model(env);
    ConjectureSpace space = section_space({0.0, 0.2, 0.5, 1.0});
    EmpiricalHistory hist;
    hist.beliefs = {{0.9, 0.1}, {0.5, 0.5}};
    hist.actions = {0, 0};

    auto exact = consistent_set(space, true_model, hist, 1e-12);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0] == 1);  // the p = 0.2 entry

    auto everything =
        consistent_set(space, true_model, hist, std::numeric_limits<double>::infinity());
    CHECK(everything.size() == 4);
}

TEST_CASE("posterior_gap: point mass on the argmin gives zero; arithmetic checks out") {
    netsys::NetSysConfig env = netsys::NetSysConfig::path(1);
    PomdpModel true_model = netsys::build_model(env);
    ConjectureSpace space = section_space({0.0, 0.2, 0.5});
    EmpiricalHistory hist;
    hist.beliefs = {{0.8, 0.2}};
    hist.actions = {0};

    Posterior on_argmin{0.0, 1.0, 0.0};
    CHECK(posterior_gap(space, true_model, hist, on_argmin) == doctest::Approx(0.0));

    std::vector<double> k(3);
    for (int i = 0; i < 3; ++i) k[i] = discrepancy(space, i, true_model, hist);
    double kmin = std::min({k[0], k[1], k[2]});
    double expected = ((k[0] - kmin) + (k[1] - kmin) + (k[2] - kmin)) / 3.0;
    CHECK(posterior_gap(space, true_model, hist, uniform_posterior(3)) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(posterior_gap(space, true_model, hist, uniform_posterior(3)) >= 0.0);
}

TEST_CASE("space validation rejects mismatched members") {
    ConjectureSpace space = section_space();
    space.parameters.pop_back();
    CHECK_THROWS_AS(validate_space(space), std::invalid_argument);
    ConjectureSpace empty;
    CHECK_THROWS_AS(validate_space(empty), std::invalid_argument);
}
