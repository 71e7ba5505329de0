#include <gtest/gtest.h>

#include <cstdlib>
#include <future>

#include "kaleido/kaleido.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"

using namespace kaleido;
namespace kt = kaleido::testing;

namespace {

json small_fixture() {
    kt::FixtureBuilder fb;
    fb.beam("act", "Value: B", -2.0).beam("act", "Value: A", -1.0).beam("act", "Value: C", -1.0);
    fb.classify("p", {{"Yes", 3.0}, {"No", 1.0}, {"Maybe", 4.0}});
    fb.classify("zero", {{"Yes", 0.0}});
    fb.embedding("x", {1.0, 0.0}).embedding("y", {0.5, 0.5});
    return fb.j;
}

}  // namespace

TEST(FixtureBackend, GenerateSortsStablyAndTruncates) {
    FixtureBackend b(small_fixture());
    auto all = b.generate(kt::gen_prompt("act"), 10);
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].text, "Value: A");
    EXPECT_EQ(all[1].text, "Value: C");
    EXPECT_EQ(all[2].text, "Value: B");
    EXPECT_EQ(b.generate(kt::gen_prompt("act"), 1).size(), 1u);
    EXPECT_THROW(b.generate(kt::gen_prompt("act"), 0), InvalidArgument);
    EXPECT_THROW(b.generate("unknown", 3), FixtureMiss);
}

TEST(FixtureBackend, ClassifyRenormalizesOverRequestedLabels) {
    FixtureBackend b(small_fixture());
    auto p = b.classify("p", {"Yes", "No"});
    EXPECT_DOUBLE_EQ(p[0], 0.75);
    EXPECT_DOUBLE_EQ(p[1], 0.25);
    auto q = b.classify("p", {"Yes", "Other"});
    EXPECT_DOUBLE_EQ(q[0], 1.0);
    EXPECT_DOUBLE_EQ(q[1], 0.0);
    EXPECT_THROW(b.classify("p", {}), InvalidArgument);
    EXPECT_THROW(b.classify("p", {"Yes", "Yes"}), InvalidArgument);
    EXPECT_THROW(b.classify("zero", {"Yes", "No"}), ProtocolError);
    EXPECT_THROW(b.classify("missing", {"Yes"}), FixtureMiss);
}

TEST(FixtureBackend, EmbedLooksUpEachText) {
    FixtureBackend b(small_fixture());
    auto v = b.embed({"y", "x"});
    EXPECT_EQ(v[0], (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(v[1], (std::vector<double>{1.0, 0.0}));
    EXPECT_THROW(b.embed({}), InvalidArgument);
    EXPECT_THROW(b.embed({"z"}), FixtureMiss);
    EXPECT_TRUE(b.healthy());
    EXPECT_EQ(b.mode(), "fixture");
}

TEST(FixtureBackend, RejectsMalformedFixtures) {
    EXPECT_THROW(FixtureBackend(json::array()), InvalidArgument);
    EXPECT_THROW(FixtureBackend(json{{"embed", {{"a", {1.0}}, {"b", {1.0, 2.0}}}}}), InvalidArgument);
    EXPECT_THROW(FixtureBackend::from_file("/nonexistent/fixture.json"), Error);
    EXPECT_NO_THROW(FixtureBackend::from_file(kt::fixture_path("backend_fixture.json")));
}

TEST(RemoteBackend, MatchesFixtureThroughTheWire) {
    auto fixture = FixtureBackend::from_file(kt::fixture_path("backend_fixture.json"));
    kt::StubBackendServer stub(fixture);
    RemoteBackend remote(stub.url() + "/", 5000, 4);
    const std::string honk = "someone cuts me off. i honk ten times";
    auto local = to_json(generate_values(*fixture, honk, published_params())).dump();
    auto wire = to_json(generate_values(remote, honk, published_params())).dump();
    EXPECT_EQ(local, wire);
    EXPECT_TRUE(remote.healthy());
    EXPECT_EQ(remote.mode(), "remote");
}

TEST(RemoteBackend, ErrorStatusIsTransportError) {
    auto fixture = FixtureBackend::from_file(kt::fixture_path("backend_fixture.json"));
    kt::StubBackendServer stub(fixture);
    RemoteBackend remote(stub.url(), 5000, 1);
    EXPECT_THROW(remote.generate("no such prompt", 3), TransportError);
}

TEST(RemoteBackend, UnreachableServer) {
    RemoteBackend remote("http://127.0.0.1:" + std::to_string(kt::unused_port()), 1000, 1);
    EXPECT_THROW(remote.classify("x", {"Yes", "No"}), TransportError);
    EXPECT_FALSE(remote.healthy());
}

TEST(RemoteBackend, MalformedResponsesAreProtocolErrors) {
    httplib::Server srv;
    srv.Post("/v1/backend/generate", [](const httplib::Request&, httplib::Response& res) { res.set_content("not json", "text/plain"); });
    srv.Post("/v1/backend/classify", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"probs":[1.0]})", "application/json");
    });
    srv.Post("/v1/backend/embed", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"vectors":[[1.0],[1.0,2.0]]})", "application/json");
    });
    int port = srv.bind_to_any_port("127.0.0.1");
    std::thread t([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), 5000, 2);
    EXPECT_THROW(remote.generate("p", 2), ProtocolError);
    EXPECT_THROW(remote.classify("p", {"Yes", "No"}), ProtocolError);
    EXPECT_THROW(remote.embed({"a", "b"}), ProtocolError);
    srv.stop();
    t.join();
}

TEST(RemoteBackend, BoundsRequestsInFlight) {
    auto fixture = FixtureBackend::from_file(kt::fixture_path("backend_fixture.json"));
    kt::StubBackendServer stub(fixture, 30);
    RemoteBackend remote(stub.url(), 5000, 2);
    const auto prompt = encode_task(Task::Relevance, "Saving my black cat called Pepper", ValueKind::Right,
                                    "Right to life (for animals)");
    std::vector<std::future<std::vector<double>>> futures;
    for (int i = 0; i < 8; ++i)
        futures.push_back(std::async(std::launch::async, [&] { return remote.classify(prompt, kRelevanceLabels); }));
    for (auto& f : futures) EXPECT_DOUBLE_EQ(f.get()[0], 0.9375);
    EXPECT_EQ(stub.requests(), 8);
    EXPECT_LE(stub.max_in_flight(), 2);
}

TEST(BackendDescriptor, ValidationAndEnvOverride) {
    auto d = descriptor_from_json(json{{"mode", "fixture"}, {"fixture_path", "f.json"}});
    EXPECT_NO_THROW(validate_descriptor(d));
    EXPECT_THROW(descriptor_from_json(json{{"mode", "grpc"}}), InvalidArgument);
    EXPECT_THROW(validate_descriptor(descriptor_from_json(json{{"mode", "remote"}})), InvalidArgument);
    EXPECT_THROW(validate_descriptor(descriptor_from_json(json{{"mode", "fixture"}, {"fixture_path", "f"}, {"base_url", "http://x"}})),
                 InvalidArgument);

    ::setenv("KALEIDO_BACKEND_URL", "http://127.0.0.1:9", 1);
    auto r = apply_backend_env(d);
    ::unsetenv("KALEIDO_BACKEND_URL");
    EXPECT_EQ(r.mode, BackendMode::Remote);
    EXPECT_EQ(r.base_url, "http://127.0.0.1:9");
    EXPECT_TRUE(r.fixture_path.empty());
    EXPECT_EQ(make_backend(r)->mode(), "remote");
    EXPECT_EQ(apply_backend_env(d).mode, BackendMode::Fixture);
}
