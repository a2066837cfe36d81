#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "rescuesim/marl.hpp"

namespace httplib {
class Server;
}

namespace rescuesim {

// HTTP/JSON environment service. One session owns one Env; requests against
// a session are serialized by a per-session mutex, distinct sessions run
// concurrently.
//
//   POST /v1/session             body: scenario JSON -> {session_id, spec}
//   POST /v1/session/{id}/reset  -> {observations, global_state}
//   POST /v1/session/{id}/step   body: {"actions": {agent_id: index}}
//                                -> {observations, reward, done, events,
//                                    global_state}
//   GET  /v1/session/{id}/state  -> trace-format snapshot of the current tick
class EnvServer {
public:
    explicit EnvServer(int max_sessions = 64);
    ~EnvServer();

    EnvServer(const EnvServer&) = delete;
    EnvServer& operator=(const EnvServer&) = delete;

    // Blocks until stop(). Returns false if the port cannot be bound.
    bool listen(const std::string& host, int port);

    // Binds an ephemeral port and serves on a background thread (tests).
    int listen_on_any_port(const std::string& host);

    void stop();

    // One "METHOD path -> status" line per request.
    void set_request_logger(std::function<void(const std::string&)> logger);

    int session_count() const;

private:
    struct Session {
        std::mutex mutex;
        std::unique_ptr<Env> env;
        bool episode_done = false;
    };

    void routes();
    std::shared_ptr<Session> find_session(const std::string& id);

    int max_sessions_;
    std::unique_ptr<httplib::Server> http_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::atomic<int> next_session_ = 1;
};

}  // namespace rescuesim
