#include "rescuesim/envserver.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rescuesim/trace.hpp"

namespace rescuesim {

namespace {

using nlohmann::json;

json error_body(const std::string& message) { return {{"error", message}}; }

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json observations_json(const Env& env) {
    json obs = json::object();
    auto vectors = env.observations();
    for (size_t i = 0; i < vectors.size(); ++i)
        obs[env.agents()[i].id] = vectors[i];
    return obs;
}

json events_json(const StepEvents& ev) {
    json events = json::array();
    for (int id : ev.arrivals)
        events.push_back({{"type", "arrival"}, {"vehicles", json::array({id})}});
    for (auto [a, b] : ev.collisions)
        events.push_back({{"type", "collision"}, {"vehicles", json::array({a, b})}});
    for (int id : ev.masked_engine_actions)
        events.push_back({{"type", "masked_action"}, {"vehicles", json::array({id})}});
    return events;
}

json spec_json(const Env& env) {
    json agents = json::array();
    for (const AgentSpec& a : env.agents())
        agents.push_back(
            {{"id", a.id},
             {"kind", a.kind == AgentKind::FireEngine ? "fire_engine" : "traffic_light"},
             {"obs_dim", a.obs_dim},
             {"action_count", a.action_count}});
    return {{"agents", std::move(agents)}, {"state_dim", env.state_dim()}};
}

}  // namespace

EnvServer::EnvServer(int max_sessions)
    : max_sessions_(max_sessions), http_(std::make_unique<httplib::Server>()) {
    if (max_sessions_ < 1) throw ValidationError("max_sessions must be >= 1");
    routes();
}

EnvServer::~EnvServer() { stop(); }

int EnvServer::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return static_cast<int>(sessions_.size());
}

std::shared_ptr<EnvServer::Session> EnvServer::find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void EnvServer::routes() {
    http_->Post("/v1/session", [this](const httplib::Request& req,
                                      httplib::Response& res) {
        json body;
        try {
            body = parse_json_text(req.body, "scenario");
        } catch (const ValidationError& e) {
            return reply(res, 400, error_body(e.what()));
        }
        std::unique_ptr<Env> env;
        try {
            env = std::make_unique<Env>(ScenarioConfig::from_json(body));
        } catch (const ValidationError& e) {
            return reply(res, 400, error_body(e.what()));
        } catch (const NoRouteError& e) {
            return reply(res, 400, error_body(e.what()));
        }
        std::string id;
        {
            std::lock_guard lock(sessions_mutex_);
            if (static_cast<int>(sessions_.size()) >= max_sessions_)
                return reply(res, 409, error_body("session limit reached"));
            id = "sess-" + std::to_string(next_session_++);
            auto session = std::make_shared<Session>();
            session->env = std::move(env);
            sessions_[id] = std::move(session);
        }
        auto session = find_session(id);
        std::lock_guard lock(session->mutex);
        reply(res, 200, {{"session_id", id}, {"spec", spec_json(*session->env)}});
    });

    http_->Post(R"(/v1/session/([^/]+)/reset)", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
        auto session = find_session(req.matches[1]);
        if (!session) return reply(res, 404, error_body("unknown session"));
        std::lock_guard lock(session->mutex);
        session->env->reset();
        session->episode_done = session->env->done();
        reply(res, 200,
              {{"observations", observations_json(*session->env)},
               {"global_state", session->env->global_state()}});
    });

    http_->Post(R"(/v1/session/([^/]+)/step)", [this](const httplib::Request& req,
                                                      httplib::Response& res) {
        auto session = find_session(req.matches[1]);
        if (!session) return reply(res, 404, error_body("unknown session"));
        std::lock_guard lock(session->mutex);
        Env& env = *session->env;
        if (session->episode_done)
            return reply(res, 409, error_body("episode is done; reset the session"));

        json body;
        try {
            body = parse_json_text(req.body, "step request");
        } catch (const ValidationError& e) {
            return reply(res, 422, error_body(e.what()));
        }
        if (!body.is_object())
            return reply(res, 422, error_body("step request must be a JSON object"));
        for (auto it = body.begin(); it != body.end(); ++it)
            if (it.key() != "actions")
                return reply(res, 422, error_body("unknown field '" + it.key() + "'"));
        if (!body.contains("actions") || !body["actions"].is_object())
            return reply(res, 422, error_body("missing actions object"));

        const json& actions = body["actions"];
        std::vector<int> indices(env.agents().size());
        for (size_t i = 0; i < env.agents().size(); ++i) {
            const AgentSpec& spec = env.agents()[i];
            if (!actions.contains(spec.id))
                return reply(res, 422,
                             error_body("missing action for agent '" + spec.id + "'"));
            const json& a = actions[spec.id];
            if (!a.is_number_integer())
                return reply(res, 422,
                             error_body("action for '" + spec.id +
                                        "' must be an integer index"));
            int idx = a.get<int>();
            if (idx < 0 || idx >= spec.action_count)
                return reply(res, 422,
                             error_body("action for '" + spec.id + "' out of range"));
            indices[i] = idx;
        }
        for (auto it = actions.begin(); it != actions.end(); ++it) {
            bool known = false;
            for (const AgentSpec& spec : env.agents())
                if (spec.id == it.key()) known = true;
            if (!known)
                return reply(res, 422, error_body("unknown agent '" + it.key() + "'"));
        }

        Env::StepResult sr = env.step(indices);
        session->episode_done = sr.done;
        reply(res, 200,
              {{"observations", observations_json(env)},
               {"reward", sr.reward},
               {"done", sr.done},
               {"events", events_json(sr.events)},
               {"global_state", env.global_state()}});
    });

    http_->Get(R"(/v1/session/([^/]+)/state)", [this](const httplib::Request& req,
                                                      httplib::Response& res) {
        auto session = find_session(req.matches[1]);
        if (!session) return reply(res, 404, error_body("unknown session"));
        std::lock_guard lock(session->mutex);
        reply(res, 200, parse_json_text(tick_line(session->env->snapshot()),
                                        "snapshot"));
    });
}

bool EnvServer::listen(const std::string& host, int port) {
    return http_->listen(host, port);
}

int EnvServer::listen_on_any_port(const std::string& host) {
    int port = http_->bind_to_any_port(host);
    if (port < 0) return -1;
    std::thread([this] { http_->listen_after_bind(); }).detach();
    http_->wait_until_ready();
    return port;
}

void EnvServer::stop() {
    if (http_) http_->stop();
}

void EnvServer::set_request_logger(std::function<void(const std::string&)> logger) {
    http_->set_logger([logger = std::move(logger)](const httplib::Request& req,
                                                   const httplib::Response& res) {
        logger(req.method + " " + req.path + " -> " + std::to_string(res.status));
    });
}

}  // namespace rescuesim
