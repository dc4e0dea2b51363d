"""Drive the session service in process: events, replay, ratings, export.

Run:  python demos/live_session.py
"""

import json
import tempfile

from graphdx import fixtures
from graphdx.orchestration import RunConfig, session_seed
from graphdx.profiles import Persona
from graphdx.service import SessionManager
from graphdx.simulator import answer

g = fixtures.toy_graph()
profiles = {p.id: p for p in fixtures.fixture_profiles()}

with tempfile.TemporaryDirectory() as data_dir:
    manager = SessionManager(
        g, profiles, data_dir, defaults=RunConfig(n=1, tau=0.005, seed=7)
    )

    # Replay mode: the simulator supplies the opening statement for a known
    # profile; a human (here: the simulator again) answers each question.
    profile = profiles["p004"]
    created = manager.create_session(profile_id=profile.id)
    sid = created["session_id"]
    print("patient opens:", created["opening"])
    payload = created["action"]
    seed = session_seed(7, profile.id)
    while payload["kind"] == "question":
        print("system asks: ", payload["question"])
        reply = answer(profile, Persona(), payload["question"], seed)
        print("patient says:", reply.text)
        payload = manager.post_message(sid, reply.text)
    print("system diagnoses:", ", ".join(payload["diagnoses"]))

    # Ratings open up once the session is terminal, then ship in the export.
    manager.submit_ratings(
        sid, {"essentiality": 4, "flow": 4, "authenticity": 5,
              "comments": "focused questioning"}
    )
    doc = json.loads(manager.export_transcript(sid))
    print("\nexported transcript keys:", sorted(doc))
    print("ratings on record:", doc["ratings"])

    # The event log is the source of truth: a fresh manager over the same
    # directory rebuilds the identical session.
    reloaded = SessionManager(
        g, profiles, data_dir, defaults=RunConfig(n=1, tau=0.005, seed=7)
    )
    assert reloaded.export_transcript(sid) == manager.export_transcript(sid)
    print("\nrestart replay: byte-identical transcript reproduced from the log")
