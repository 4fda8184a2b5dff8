"""
Настройки базы данных реестра запусков с использованием SQLAlchemy.

Содержит конфигурацию подключения к базе данных и сессии.
"""

from contextlib import contextmanager
from typing import Iterator, Optional
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker
from sqlalchemy.pool import StaticPool
from loguru import logger

from config.settings import settings


class Base(DeclarativeBase):
    """Базовый класс для всех моделей."""
    pass


_engine: Optional[Engine] = None
_session_maker: Optional[sessionmaker] = None


def init_database(url: Optional[str] = None) -> Engine:
    """
    Инициализация базы данных реестра.

    Args:
        url: URL подключения (по умолчанию из настроек)

    Returns:
        Engine: Движок SQLAlchemy
    """
    global _engine, _session_maker

    url = url or settings.DATABASE_URL
    kwargs = {"echo": settings.ECHO_SQL}
    if url in ("sqlite://", "sqlite:///:memory:"):
        # одна общая connection, иначе in-memory база пустая в каждой сессии
        kwargs.update(connect_args={"check_same_thread": False}, poolclass=StaticPool)

    try:
        # Импортируем все модели для регистрации в метаданных
        from app.models import ExperimentRun, EpochRecord, SweepPoint  # noqa: F401

        _engine = create_engine(url, **kwargs)
        _session_maker = sessionmaker(_engine, expire_on_commit=False)
        Base.metadata.create_all(_engine)
        logger.debug(f"База данных реестра инициализирована: {url}")
        return _engine
    except Exception as e:
        logger.error(f"Ошибка инициализации базы данных: {e}")
        raise


@contextmanager
def get_db_session() -> Iterator[Session]:
    """
    Получение сессии базы данных (контекстный менеджер).

    Yields:
        Session: Сессия базы данных
    """
    if _session_maker is None:
        init_database()
    session = _session_maker()
    try:
        yield session
    except Exception as e:
        logger.error(f"Ошибка в сессии базы данных: {e}")
        session.rollback()
        raise
    finally:
        session.close()


def close_database() -> None:
    """Закрытие соединения с базой данных."""
    global _engine, _session_maker
    if _engine is not None:
        _engine.dispose()
        logger.debug("Соединение с базой данных закрыто")
    _engine = None
    _session_maker = None
