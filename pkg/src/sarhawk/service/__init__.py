from .session import Session, open_session, replay_file

__all__ = ["Session", "open_session", "replay_file"]
