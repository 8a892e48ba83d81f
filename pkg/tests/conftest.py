import pytest

from framefix.ontology import ontology_from_dict


@pytest.fixture
def toy_ontology():
    """Small two-domain ontology shared by parser, diff, and pipeline tests."""
    return ontology_from_dict(
        {
            "version": "1",
            "domains": {
                "PLAY_MUSIC": "music",
                "PAUSE_MUSIC": "music",
                "CREATE_CALL": "calls",
                "SEND_MESSAGE": "calls",
                "GET_WEATHER": "weather",
                "UNSUPPORTED": "other",
            },
            "slots": {
                "PLAYLIST_NAME": {"templatable": True, "gazetteer": "PLAYLIST_NAME"},
                "MUSIC_TYPE": {"templatable": False},
                "CONTACT": {"templatable": True, "gazetteer": "CONTACT"},
                "MESSAGE": {"templatable": False},
                "LOCATION": {"templatable": True, "gazetteer": "LOCATION"},
                "DATE_TIME": {"templatable": False},
            },
        }
    )
