#include "rep/service/http.hpp"

#include "rep/common/error.hpp"

namespace rep::service {

using nlohmann::json;
using nlohmann::ordered_json;

int http_status(const std::exception& e) {
    if (dynamic_cast<const NotFound*>(&e)) return 404;
    if (dynamic_cast<const Conflict*>(&e)) return 409;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const NoCandidate*>(&e)) return 422;
    if (dynamic_cast<const BadRequest*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const FormatError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return 400;
    return 500;
}

namespace {

void send(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send(res, http_status(e), {{"code", e.code()}, {"message", e.what()}});
        } catch (const json::exception& e) {
            send(res, 400, {{"code", "bad_request"}, {"message", e.what()}});
        } catch (const std::exception& e) {
            send(res, 500, {{"code", "internal"}, {"message", e.what()}});
        }
    };
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
}

ordered_json with_persona(Service& svc, const std::string& persona_id, ordered_json j) {
    const auto cat = svc.catalog();
    if (auto it = cat->personas.find(persona_id); it != cat->personas.end())
        j["persona"] = {{"id", it->second.id}, {"name", it->second.name}, {"avatar", it->second.avatar}};
    return j;
}

} // namespace

void mount_routes(httplib::Server& server, Service& svc, const std::filesystem::path& static_dir) {
    server.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
        send(res, 200, {{"status", "ok"}});
    }));

    server.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto b = body_of(req);
        const auto r = svc.create_session(b.value("script_id", std::string()), b.value("persona_id", std::string()));
        send(res, 201, with_persona(svc, svc.meta(r.session_id).persona_id, r.to_json()));
    }));

    server.Post("/sessions/:id/messages", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto b = body_of(req);
        dialogue::UserEvent ev;
        if (b.contains("text")) {
            if (!b["text"].is_string()) throw BadRequest("text must be a string");
            ev = dialogue::UserEvent::say(b["text"].get<std::string>());
        } else if (b.contains("question_id") && b.contains("value")) {
            if (!b["question_id"].is_string() || !b["value"].is_number_integer())
                throw BadRequest("question_id must be a string and value an integer");
            ev = dialogue::UserEvent::answer(b["question_id"].get<std::string>(), b["value"].get<int>());
        } else {
            throw BadRequest("expected {\"text\"} or {\"question_id\", \"value\"}");
        }
        send(res, 200, svc.post_message(req.path_params.at("id"), ev).to_json());
    }));

    server.Get("/sessions/:id", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        auto j = svc.meta(id).to_json();
        const auto st = svc.state(id);
        j["turn"] = st.turn;
        j["pending_question"] = st.pending ? ordered_json(st.pending->question_id) : ordered_json(nullptr);
        send(res, 200, with_persona(svc, j["persona_id"].get<std::string>(), j));
    }));

    server.Get("/sessions/:id/report", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, 200, svc.get_report(req.path_params.at("id")).to_json());
    }));

    server.Get("/sessions/:id/transcript", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, 200, svc.transcript(req.path_params.at("id")));
    }));

    server.Get("/results", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto sort_by = req.has_param("sort_by") ? req.get_param_value("sort_by") : std::string("im");
        const auto order = req.has_param("order") ? req.get_param_value("order") : std::string("desc");
        ordered_json rows = ordered_json::array();
        for (auto& r : svc.list_results(sort_by, order)) rows.push_back(std::move(r));
        send(res, 200, {{"sort_by", sort_by}, {"order", order}, {"results", rows}});
    }));

    server.Get("/r/:sid/:token", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        res.set_redirect(svc.track_click(req.path_params.at("sid"), req.path_params.at("token")), 302);
    }));

    if (std::filesystem::is_directory(static_dir)) server.set_mount_point("/", static_dir.string());
}

} // namespace rep::service
