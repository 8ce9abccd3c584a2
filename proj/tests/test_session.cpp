#include "linecospar/errors.hpp"
#include "linecospar/session.hpp"

#include "session_driver.hpp"

#include "httplib.h"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

using namespace linecospar;
namespace fs = std::filesystem;

namespace {

double quadratic(const std::vector<double> & x) {
    // Peak at (0.3, 7) on the [−1, 1] × [5, 10] space used below.
    return -(x[0] - 0.3) * (x[0] - 0.3) - 0.04 * (x[1] - 7.0) * (x[1] - 7.0);
}

json custom_space(std::uint64_t seed) {
    return json{{"space", {{"lower", {-1.0, 5.0}}, {"upper", {1.0, 10.0}}, {"names", {"a", "b"}}}}, {"seed", seed}};
}

fs::path fresh_dir(const std::string & name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Session, ExoskeletonPreset) {
    SessionManager manager;
    const auto r = manager.create(R"({"preset":"exoskeleton","seed":4})");
    ASSERT_EQ(r.status, 201);
    const json doc = json::parse(r.body);
    const auto space = ActionSpace::exoskeleton();
    const json & trial = doc["trial"];
    EXPECT_EQ(trial["index"], 1);
    ASSERT_EQ(trial["action"].size(), 6u);
    ASSERT_EQ(trial["parameters"].size(), 6u);
    for (int i = 0; i < 6; ++i) {
        const double v = trial["action"][i].get<double>();
        EXPECT_GE(v, space.lower[i]);
        EXPECT_LE(v, space.upper[i]);
        EXPECT_EQ(trial["parameters"][space.names[i]].get<double>(), v);
    }
    EXPECT_EQ(manager.size(), 1u);
}

TEST(Session, SameSeedSameTrajectory) {
    auto run = [](std::uint64_t seed) {
        Session s("fixed", custom_space(seed), seed);
        std::optional<std::vector<double>> previous;
        for (int i = 0; i < 12; ++i) {
            const auto current = s.trial_payload()["action"].get<std::vector<double>>();
            s.submit(json{{"preference", fixtures::answer(quadratic, current, previous ? &*previous : nullptr)}});
            previous = current;
        }
        return s.state().dump();
    };
    EXPECT_EQ(run(9), run(9));
    EXPECT_NE(run(9), run(10));
}

TEST(Session, NoPreferenceLeavesDataUnchanged) {
    Session s("np", custom_space(2), 2);
    s.submit(json{{"preference", "none"}});
    s.submit(json{{"preference", "second"}});
    const auto before = s.optimizer().dataset().size();
    ASSERT_GE(before, 1u);
    s.submit(json{{"preference", "none"}});
    EXPECT_EQ(s.optimizer().dataset().size(), before);
    EXPECT_EQ(s.trial(), 4);
}

TEST(Session, FullProtocolShapes) {
    Session s("shape", custom_space(3), 3);
    json last;
    for (int trial = 1; trial <= kLearningTrials; ++trial) {
        last = s.submit(json{{"trial", trial}, {"preference", trial % 2 ? "first" : "second"}});
        ASSERT_TRUE(last.contains("trial"));
        EXPECT_EQ(last["trial"]["index"], trial + 1);
        EXPECT_TRUE(last["trial"].contains("action"));
    }
    EXPECT_EQ(s.phase(), Phase::Validation);
    const json frozen = s.report()["a_max"];
    ASSERT_FALSE(frozen.is_null());
    // a_max shows up as validation trials 2 and 5.
    for (int v = 0; v < kValidationTrials - 1; ++v) {
        const json t = s.trial_payload();
        if (v == 1 || v == 4) {
            EXPECT_EQ(t["action"], frozen["action"]);
        }
        s.submit(json{{"preference", "none"}});
    }
    const json done = s.submit(json{{"preference", "first"}});
    ASSERT_TRUE(done.contains("summary"));
    EXPECT_EQ(done["summary"]["action"], frozen["action"]);
    EXPECT_EQ(done["summary"]["validation_scored"], kScoredComparisons);
    // "none" on the first three scored comparisons counts as not preferred; the
    // final "first" picks a_max over the last random action.
    EXPECT_EQ(done["summary"]["validation_correct"], 1);
    EXPECT_DOUBLE_EQ(done["summary"]["validation_accuracy_pct"].get<double>(), 25.0);
    EXPECT_EQ(s.phase(), Phase::Done);
    EXPECT_THROW(s.submit(json{{"preference", "first"}}), ApiError);
}

TEST(Session, CoactiveTargetSnapsToLineSteps) {
    json req{{"space", {{"lower", {0.0, 0.0}}, {"upper", {10.0, 10.0}}, {"granularity", 11}}}};
    Session s("co", req, 6);
    s.submit(json{{"preference", "none"}});
    const Eigen::VectorXd current = s.space().normalize(
        Eigen::Map<const Eigen::VectorXd>(s.trial_payload()["action"].get<std::vector<double>>().data(), 2));
    const auto records_before = s.optimizer().dataset().size();
    // 2.4 physical units = 2.4 steps of 1.0 -> 2 steps, clamped to the cube.
    s.submit(json{{"preference", "none"}, {"coactive", {{"dim", 0}, {"direction", 1}, {"magnitude", 2.4}}}});
    const double expected = std::min(1.0, current[0] + 0.2);
    if (expected - current[0] > 1e-12) {
        EXPECT_EQ(s.optimizer().dataset().size(), records_before + 1);
        bool found = false;
        for (const auto & a : s.optimizer().dataset().actions())
            if (std::abs(a.coords[0] - expected) < 1e-12 && std::abs(a.coords[1] - current[1]) < 1e-12) found = true;
        EXPECT_TRUE(found);
    } else {
        EXPECT_EQ(s.optimizer().dataset().size(), records_before);
    }
    EXPECT_THROW(s.submit(json{{"preference", "none"}, {"coactive", {{"dim", 2}, {"direction", 1}, {"magnitude", 1}}}}),
                 InvalidArgument);
    EXPECT_THROW(s.submit(json{{"preference", "none"}, {"coactive", {{"dim", 0}, {"direction", 0}, {"magnitude", 1}}}}),
                 InvalidArgument);
}

TEST(Session, PhysicalBoundsRespected) {
    Session s("bounds", custom_space(8), 8);
    for (int i = 0; i < kLearningTrials + kValidationTrials; ++i) {
        const auto a = s.trial_payload()["action"].get<std::vector<double>>();
        EXPECT_GE(a[0], -1.0);
        EXPECT_LE(a[0], 1.0);
        EXPECT_GE(a[1], 5.0);
        EXPECT_LE(a[1], 10.0);
        s.submit(json{{"preference", i % 3 == 0 ? "none" : "first"}});
    }
}

TEST(Manager, ErrorStatuses) {
    SessionManager manager;
    EXPECT_EQ(manager.feedback("nope", R"({"preference":"none"})").status, 404);
    EXPECT_EQ(manager.report("nope").status, 404);
    EXPECT_EQ(manager.create(R"({"space":{"lower":[1,0],"upper":[0,1]}})").status, 400);
    EXPECT_EQ(manager.create(R"({"space":{"lower":[0,0],"upper":[1]}})").status, 400);
    EXPECT_EQ(manager.create(R"({"preset":"bicycle"})").status, 400);
    EXPECT_EQ(manager.create(R"({"preset":"exoskeleton","config":{"granularity":1}})").status, 400);
    EXPECT_EQ(manager.create("not json").status, 400);
    EXPECT_EQ(manager.size(), 0u);

    const auto created = manager.create(custom_space(1).dump());
    const std::string id = json::parse(created.body)["id"];
    EXPECT_EQ(manager.feedback(id, R"({"preference":"maybe"})").status, 400);
    EXPECT_EQ(manager.feedback(id, R"({"trial":2,"preference":"none"})").status, 409);
    EXPECT_EQ(manager.feedback(id, R"({"trial":1,"preference":"none"})").status, 200);
    EXPECT_EQ(manager.feedback(id, R"({"trial":1,"preference":"none"})").status, 409);
    for (int t = 2; t <= kLearningTrials + kValidationTrials; ++t)
        ASSERT_EQ(manager.feedback(id, json{{"trial", t}, {"preference", "first"}}.dump()).status, 200);
    EXPECT_EQ(manager.feedback(id, R"({"preference":"first"})").status, 410);
}

TEST(Manager, ReportLifecycle) {
    SessionManager manager;
    const auto created = manager.create(custom_space(5).dump());
    const std::string id = json::parse(created.body)["id"];
    const json fresh = json::parse(manager.report(id).body);
    EXPECT_EQ(fresh["trials_completed"], 0);
    EXPECT_TRUE(fresh["trials"].empty());
    EXPECT_TRUE(fresh["a_max"].is_null());
    EXPECT_EQ(fresh["validation"]["scored"], 0);
    EXPECT_TRUE(fresh["correlation"]["pooled"].is_null());
    EXPECT_EQ(fresh["phase"], "learning");

    for (int t = 1; t <= kLearningTrials + kValidationTrials; ++t)
        ASSERT_EQ(manager.feedback(id, json{{"trial", t}, {"preference", t % 2 ? "first" : "second"}}.dump()).status, 200);
    const auto a = manager.report(id), b = manager.report(id);
    EXPECT_EQ(a.body, b.body);
    const json done = json::parse(a.body);
    EXPECT_EQ(done["phase"], "done");
    EXPECT_EQ(done["trials_completed"], kLearningTrials + kValidationTrials);
    EXPECT_FALSE(done["a_max"].is_null());
    EXPECT_EQ(done["correlation"]["per_dim"].size(), 2u);
}

TEST(Manager, ReplayReproducesStateBytes) {
    const auto dir = fresh_dir("linecospar_session_logs");
    std::string id, live;
    {
        SessionManager manager(dir);
        const auto result = fixtures::drive(manager, custom_space(21), quadratic);
        id = result.id;
        live = manager.state(id).body;
        EXPECT_EQ(replay_state(dir / (id + ".jsonl")), live);
        // A session stopped mid-way replays too.
        const auto partial = manager.create(custom_space(22).dump());
        const std::string pid = json::parse(partial.body)["id"];
        manager.feedback(pid, R"({"preference":"none"})");
        manager.feedback(pid, R"({"preference":"second","coactive":{"dim":1,"direction":-1,"magnitude":0.7}})");
        EXPECT_EQ(replay_state(dir / (pid + ".jsonl")), manager.state(pid).body);
    }
    SessionManager restored(dir);
    EXPECT_EQ(restored.load_logs(), 2u);
    EXPECT_EQ(restored.state(id).body, live);
    fs::remove_all(dir);
}

TEST(Manager, ConcurrentDuplicateSubmissionsAcceptOne) {
    SessionManager manager;
    const auto created = manager.create(custom_space(30).dump());
    const std::string id = json::parse(created.body)["id"];
    for (int t = 1; t <= 10; ++t) {
        const std::string body = json{{"trial", t}, {"preference", "first"}}.dump();
        std::atomic<int> ok{0}, conflict{0};
        std::vector<std::thread> threads;
        for (int k = 0; k < 4; ++k) {
            threads.emplace_back([&] {
                const int status = manager.feedback(id, body).status;
                if (status == 200) ++ok;
                if (status == 409) ++conflict;
            });
        }
        for (auto & th : threads) th.join();
        EXPECT_EQ(ok.load(), 1);
        EXPECT_EQ(conflict.load(), 3);
    }
    EXPECT_EQ(json::parse(manager.state(id).body)["trial"], 11);
}

TEST(Manager, ReadsDuringWrites) {
    SessionManager manager;
    const auto created = manager.create(custom_space(31).dump());
    const std::string id = json::parse(created.body)["id"];
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        while (!stop) {
            const auto r = manager.report(id);
            if (r.status != 200 || !json::accept(r.body)) ++bad;
        }
    });
    for (int t = 1; t <= 15; ++t) manager.feedback(id, json{{"trial", t}, {"preference", "second"}}.dump());
    stop = true;
    reader.join();
    EXPECT_EQ(bad.load(), 0);
}

TEST(Http, RoundTrip) {
    SessionManager manager;
    httplib::Server server;
    install_routes(server, manager);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);

    auto created = client.Post("/sessions", R"({"preset":"exoskeleton","seed":3})", "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const json doc = json::parse(created->body);
    const std::string id = doc["id"];

    auto fb = client.Post("/sessions/" + id + "/feedback", R"({"trial":1,"preference":"none"})", "application/json");
    ASSERT_TRUE(fb);
    EXPECT_EQ(fb->status, 200);
    EXPECT_EQ(json::parse(fb->body)["trial"]["index"], 2);

    auto stale = client.Post("/sessions/" + id + "/feedback", R"({"trial":1,"preference":"none"})", "application/json");
    ASSERT_TRUE(stale);
    EXPECT_EQ(stale->status, 409);
    EXPECT_TRUE(json::parse(stale->body).contains("error"));

    auto report = client.Get("/sessions/" + id + "/report");
    ASSERT_TRUE(report);
    EXPECT_EQ(report->status, 200);
    EXPECT_EQ(json::parse(report->body)["trials_completed"], 1);

    auto state = client.Get("/sessions/" + id + "/state");
    ASSERT_TRUE(state);
    EXPECT_EQ(state->body, manager.state(id).body);

    auto missing = client.Get("/sessions/0000/report");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    server.stop();
    worker.join();
}
