#include "support.hpp"

#include <thread>

#include <httplib.h>

#include "cqv/study.hpp"
#include "cqv/study_server.hpp"

using namespace cqv;
using namespace std::chrono_literals;
using cqv::testing::require_error;
using cqv::testing::test_data;
using nlohmann::json;

namespace {

std::vector<std::string> record_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("q" + std::to_string(i));
    return ids;
}

std::vector<Participant> people(std::size_t n) {
    std::vector<Participant> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"P" + std::to_string(i), i % 3 ? Expertise::NonExpert : Expertise::Expert});
    return out;
}

// Manually advanced clock.
struct FakeClock {
    std::chrono::steady_clock::time_point now{};
    Clock fn() {
        return [this] { return now; };
    }
};

SessionPlan four_task_plan(std::chrono::milliseconds limit = 1000ms) {
    SessionPlan p;
    p.participant_id = "P1";
    p.tasks = {{"a", Condition::Assisted}, {"b", Condition::Assisted}, {"c", Condition::Unassisted}, {"d", Condition::Unassisted}};
    p.per_condition_limit = limit;
    return p;
}

std::map<std::string, Suggestion> suggestions_for(const Corpus& c) {
    std::map<std::string, Suggestion> out;
    for (const auto& r : c.records) {
        out[r.id] = Suggestion{BinaryLabel::Yes, "PREFIX : <http://example.org/building#>\nASK { ?b a :Building }", false, "raw"};
    }
    return out;
}

}  // namespace

TEST_SUITE("study") {

TEST_CASE("counterbalancing: exposure balance and alternating order") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 1 + seed % 13;
        auto plans = build_assignment(people(n), record_ids(20), seed);
        REQUIRE(plans.size() == n);
        std::map<std::string, int> assisted, unassisted;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto& p = plans[i];
            CHECK(p.tasks.size() == 20);
            CHECK(p.first_block_size() == 10);
            std::set<std::string> seen;
            for (std::size_t k = 0; k < p.tasks.size(); ++k) {
                seen.insert(p.tasks[k].record_id);
                (p.tasks[k].condition == Condition::Assisted ? assisted : unassisted)[p.tasks[k].record_id]++;
                Condition first = p.order == ConditionOrder::AssistedFirst ? Condition::Assisted : Condition::Unassisted;
                CHECK((k < 10) == (p.tasks[k].condition == first));
            }
            CHECK(seen.size() == 20);
            CHECK(p.order == (i % 2 == 0 ? ConditionOrder::AssistedFirst : ConditionOrder::UnassistedFirst));
        }
        for (const auto& id : record_ids(20)) {
            int diff = std::abs(assisted[id] - unassisted[id]);
            if (n % 2 == 0) {
                CHECK_MESSAGE(diff == 0, "seed " << seed << " record " << id);
            } else {
                CHECK(diff <= 1);
            }
        }
    }
}

TEST_CASE("assignment errors and determinism") {
    require_error(ErrorKind::OddRecordCount, [] { build_assignment(people(1), record_ids(19), 0); });
    require_error(ErrorKind::InvalidArgument, [] { build_assignment({}, record_ids(4), 0); });
    require_error(ErrorKind::InvalidArgument, [] { build_assignment(people(1), {"a", "a"}, 0); });
    CHECK(build_assignment(people(4), record_ids(20), 5) == build_assignment(people(4), record_ids(20), 5));
}

TEST_CASE("session: answers are stored with elapsed time") {
    FakeClock clk;
    Session s(four_task_plan(), "tok", clk.fn());
    auto v = s.next_task();
    CHECK(v.record_id == "a");
    CHECK(v.remaining == 1000ms);
    clk.now += 300ms;
    v = s.submit("a", Answer::Yes, 2);
    CHECK(v.record_id == "b");
    REQUIRE(s.responses().size() == 1);
    CHECK(s.responses()[0].elapsed == 300ms);
    CHECK(s.responses()[0].half == Half::First);
    CHECK(s.responses()[0].difficulty == 2);
    clk.now += 100ms;
    s.submit("b", Answer::IDK, 5);
    clk.now += 50ms;
    v = s.next_task();
    CHECK(v.condition == Condition::Unassisted);
    CHECK(v.remaining == 950ms);  // second window opened when the first block ended
    s.submit("c", Answer::No, 1);
    CHECK(s.responses()[2].elapsed == 50ms);
    CHECK(s.responses()[2].half == Half::Second);
}

TEST_CASE("session: ordering, duplicates and rating rules") {
    FakeClock clk;
    Session s(four_task_plan(), "tok", clk.fn());
    require_error(ErrorKind::InvalidResponse, [&] { s.submit("a", Answer::Yes, std::nullopt); });
    require_error(ErrorKind::InvalidResponse, [&] { s.submit("a", Answer::Yes, 6); });
    require_error(ErrorKind::InvalidResponse, [&] { s.submit("a", Answer::Skipped, 3); });
    require_error(ErrorKind::InvalidResponse, [&] { s.submit("zzz", Answer::Yes, 3); });
    require_error(ErrorKind::OutOfOrderResponse, [&] { s.submit("b", Answer::Yes, 3); });
    s.submit("a", Answer::Skipped, std::nullopt);
    require_error(ErrorKind::DuplicateResponse, [&] { s.submit("a", Answer::Yes, 3); });
    require_error(ErrorKind::InvalidResponse, [&] { s.submit_survey(std::vector<int>(10, 3)); });
    s.submit("b", Answer::Yes, 1);
    s.submit("c", Answer::Yes, 1);
    s.submit("d", Answer::No, 1);
    CHECK(s.complete());
    require_error(ErrorKind::DuplicateResponse, [&] { s.submit("d", Answer::No, 1); });
    CHECK(s.next_task().survey_pending);
    CHECK(s.submit_survey(std::vector<int>(10, 3)).score == 50);
    require_error(ErrorKind::DuplicateResponse, [&] { s.submit_survey(std::vector<int>(10, 3)); });
    CHECK(s.drain_new().size() == 4);
    CHECK(s.drain_new().empty());
}

TEST_CASE("session: a closed session rejects submissions") {
    FakeClock clk;
    Session s(four_task_plan(), "tok", clk.fn());
    s.submit("a", Answer::Yes, 3);
    s.close();
    require_error(ErrorKind::SessionExpired, [&] { s.submit("b", Answer::Yes, 3); });
    CHECK(s.next_task().done);
}

TEST_CASE("session: expiry auto-skips the rest of the block") {
    FakeClock clk;
    Session s(four_task_plan(), "tok", clk.fn());
    s.next_task();
    clk.now += 200ms;
    s.submit("a", Answer::Yes, 3);
    clk.now += 900ms;  // first window closed at 1000ms
    auto v = s.next_task();
    CHECK(v.record_id == "c");
    CHECK(v.remaining == 900ms);  // second window opened at the first deadline
    REQUIRE(s.responses().size() == 2);
    CHECK(s.responses()[1].answer == Answer::Skipped);
    CHECK(s.responses()[1].auto_skipped);
    CHECK(s.responses()[1].elapsed == 1000ms);
    CHECK_FALSE(s.responses()[1].difficulty);
    require_error(ErrorKind::WindowExpired, [&] { s.submit("b", Answer::Yes, 3); });
    clk.now += 5000ms;
    CHECK(s.next_task().done);
    CHECK(s.responses().size() == 4);
    require_error(ErrorKind::WindowExpired, [&] { s.submit("d", Answer::Yes, 3); });
}

TEST_CASE("SUS scoring") {
    CHECK(compute_sus({5, 1, 5, 1, 5, 1, 5, 1, 5, 1}) == 100);
    CHECK(compute_sus(std::vector<int>(10, 3)) == 50);
    CHECK(compute_sus({4, 2, 4, 2, 4, 2, 4, 2, 4, 2}) == 75);
    CHECK(compute_sus({1, 5, 1, 5, 1, 5, 1, 5, 1, 5}) == 0);
    require_error(ErrorKind::WrongItemCount, [] { compute_sus({1, 2, 3}); });
    require_error(ErrorKind::OutOfRange, [] { compute_sus({0, 1, 1, 1, 1, 1, 1, 1, 1, 1}); });
    CHECK(sus_items().size() == 10);
}

TEST_CASE("names and JSON round trips") {
    for (auto a : {Answer::Yes, Answer::No, Answer::IDK, Answer::Skipped}) CHECK(parse_answer(to_string(a)) == a);
    CHECK(parse_answer("skip") == Answer::Skipped);
    require_error(ErrorKind::InvalidResponse, [] { parse_answer("perhaps"); });
    auto plan = build_assignment(people(2), record_ids(6), 1, 90s)[1];
    CHECK(plan_from_json(to_json(plan)) == plan);
    TaskResponse r;
    r.participant_id = "P";
    r.record_id = "q";
    r.answer = Answer::IDK;
    r.difficulty = 4;
    r.elapsed = 1234ms;
    r.half = Half::Second;
    r.task_index = 7;
    r.order = ConditionOrder::UnassistedFirst;
    CHECK(response_from_json(to_json(r)) == r);
}

TEST_CASE("event log") {
    cqv::testing::TempDir tmp;
    EventLog log(tmp / "events.jsonl");
    TaskResponse r;
    r.participant_id = "P";
    r.record_id = "q";
    log.append({{"type", "response"}, {"response", to_json(r)}});
    log.append({{"type", "survey"}, {"participant_id", "P"}, {"items", std::vector<int>(10, 3)}, {"score", 50.0}});
    log.append({{"type", "session_created"}});
    auto events = read_events(tmp / "events.jsonl");
    CHECK(events.size() == 3);
    auto responses = responses_from_events(events);
    REQUIRE(responses.size() == 1);
    CHECK(responses[0] == r);
    auto surveys = surveys_from_events(events);
    REQUIRE(surveys.size() == 1);
    CHECK(surveys[0].score == 50);
    CHECK(parse_events(log.text()).size() == 3);
}

TEST_CASE("bundle write/load and suggestion cards") {
    cqv::testing::TempDir tmp;
    Corpus c = load_corpus(test_data("small.json"));
    auto cards = make_cards(c, suggestions_for(c));
    CHECK(cards.size() == 20);
    CHECK(cards.at("b01").verification.grounding->verdict == GroundingVerdict::FullyGrounded);
    CHECK(cards.at("a01").verification.grounding->verdict != GroundingVerdict::FullyGrounded);
    CHECK(cards.at("b01").suggestion.raw_completion.empty());
    auto missing = suggestions_for(c);
    missing.erase("b01");
    require_error(ErrorKind::MissingSuggestion, [&] { make_cards(c, missing); });

    auto plans = build_assignment(people(2), [&] {
        std::vector<std::string> ids;
        for (const auto& r : c.records) ids.push_back(r.id);
        return ids;
    }(), 4);
    write_bundle(tmp / "bundle", c, cards, plans);
    auto b = load_bundle(tmp / "bundle");
    CHECK(b.corpus.records.size() == 20);
    CHECK(b.cards.size() == 20);
    CHECK(b.plans == plans);
    auto card = card_from_json(to_json(cards.at("b01")));
    CHECK(card.suggestion.sparql == cards.at("b01").suggestion.sparql);
}

TEST_CASE("study service: request routing") {
    cqv::testing::TempDir tmp;
    Corpus c = load_corpus(test_data("small.json"));
    std::vector<std::string> ids;
    for (const auto& r : c.records) ids.push_back(r.id);
    write_bundle(tmp / "bundle", c, make_cards(c, suggestions_for(c)), build_assignment(people(2), ids, 9));
    FakeClock clk;
    StudyService svc(load_bundle(tmp / "bundle"), tmp / "events.jsonl", clk.fn());

    CHECK(svc.handle("GET", "/health", "").status == 200);
    CHECK(svc.handle("GET", "/nowhere", "").status == 404);
    auto created = svc.handle("POST", "/sessions", R"({"participant_id":"P0"})");
    REQUIRE(created.status == 201);
    std::string token = json::parse(created.body).at("token");
    CHECK(svc.handle("GET", "/sessions/ffff/task", "").status == 404);

    json task = json::parse(svc.handle("GET", "/sessions/" + token + "/task", "").body);
    CHECK(task["index"] == 0);
    CHECK(task["total"] == 20);
    CHECK(task.contains("cq"));
    CHECK(task["remaining_seconds"] == 1200);
    const bool assisted = task["condition"] == "assisted";
    CHECK(task.contains("suggestion") == assisted);
    CHECK(svc.handle("GET", task["ontology_url"].get<std::string>(), "").status == 200);

    auto bad = svc.handle("POST", "/sessions/" + token + "/response", R"({"record_id":"x","answer":"yes","difficulty":2})");
    CHECK(bad.status == 400);
    CHECK(json::parse(bad.body)["error"] == "InvalidResponse");
    auto ok = svc.handle("POST", "/sessions/" + token + "/response",
                         json{{"record_id", task["record_id"]}, {"answer", "yes"}, {"difficulty", 2}}.dump());
    CHECK(ok.status == 200);
    CHECK(json::parse(ok.body)["next"]["index"] == 1);
    auto dup = svc.handle("POST", "/sessions/" + token + "/response",
                          json{{"record_id", task["record_id"]}, {"answer", "yes"}, {"difficulty", 2}}.dump());
    CHECK(dup.status == 409);

    clk.now += 21min;
    json after = json::parse(svc.handle("GET", "/sessions/" + token + "/task", "").body);
    CHECK(after["index"] == 10);
    auto log = svc.handle("GET", "/admin/export", "");
    CHECK(log.content_type == "application/x-ndjson");
    auto responses = responses_from_events(parse_events(log.body));
    CHECK(responses.size() == 10);
    CHECK(std::count_if(responses.begin(), responses.end(), [](const TaskResponse& r) { return r.auto_skipped; }) == 9);
}

TEST_CASE("study server over HTTP") {
    cqv::testing::TempDir tmp;
    Corpus c = load_corpus(test_data("small.json"));
    std::vector<std::string> ids;
    for (const auto& r : c.records) ids.push_back(r.id);
    write_bundle(tmp / "bundle", c, make_cards(c, suggestions_for(c)), build_assignment(people(1), ids, 2));
    StudyService svc(load_bundle(tmp / "bundle"), tmp / "events.jsonl");
    StudyServer server(svc);
    int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.serve(); });

    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Post("/sessions", R"({"participant_id":"P0"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    std::string token = json::parse(res->body)["token"];
    auto task = cli.Get("/sessions/" + token + "/task");
    REQUIRE(task);
    CHECK(json::parse(task->body)["total"] == 20);
    auto resp = cli.Post("/sessions/" + token + "/response",
                         json{{"record_id", json::parse(task->body)["record_id"]}, {"answer", "no"}, {"difficulty", 4}}.dump(),
                         "application/json");
    REQUIRE(resp);
    CHECK(resp->status == 200);
    auto exported = cli.Get("/admin/export");
    REQUIRE(exported);
    auto rs = responses_from_events(parse_events(exported->body));
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].answer == Answer::No);
    CHECK(rs[0].difficulty == 4);

    server.stop();
    t.join();
}

}
