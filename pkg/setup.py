from setuptools import setup

setup(name='Conelet',
      version='0.1',
      description='Compactly supported cone-adapted shearlet frames: filter design, frame bound certificates, digital transform and N-term benchmarks',
      packages=['conelet'],
      package_data={'conelet': ['schema/*.json']},
      entry_points={
          'console_scripts': ['conelet = conelet.cli:main'],
      },
      install_requires=[
      	'jsonschema (>=4.0, <5.0)',
      	'matplotlib (>=3.4, <4.0)',
      	'mpmath (>=1.2, <2.0)',
      	'numpy (>=1.22, <2.0)',
      	'pandas (>=1.5, <3.0)',
      	'scipy (>=1.12, <2.0)',
      	'tqdm (>=4.45, <5.0)',
      ],
      extras_require={
          'test': ['pytest (>=7.0)'],
      },
     )
